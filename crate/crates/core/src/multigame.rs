//! Repeated matching games with a best-association tracker.
//!
//! The first game runs on channel-norm preferences. Each later game runs on
//! rate preferences computed with every other UE fixed at the previous
//! game's association. The tracker keeps the highest-utility association
//! seen; ties keep the earlier one.

use serde::{Deserialize, Serialize};

use crate::beamrate::RateContext;
use crate::error::{Result, SimError};
use crate::games::{play, GameInput, GameKind, GameResult};
use crate::netmodel::AssociationVector;
use crate::prefs::{build_by_channel_norm, build_by_rate, RangeMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiGameConfig {
    /// Number of games `N`, at least 1.
    pub rounds: usize,
    pub inner: GameKind,
    /// Stop once a game reproduces the previous association.
    pub early_exit: bool,
}

impl Default for MultiGameConfig {
    fn default() -> Self {
        Self {
            rounds: 10,
            inner: GameKind::EaPluRa,
            early_exit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub best_beta: Option<AssociationVector>,
    pub best_utility: f64,
    pub best_round: Option<usize>,
    pub history: Vec<f64>,
}

impl Default for TrackerState {
    fn default() -> Self {
        Self {
            best_beta: None,
            best_utility: f64::NEG_INFINITY,
            best_round: None,
            history: Vec::new(),
        }
    }
}

/// Records one round; the best entry changes only on strict improvement.
pub fn tracker_update(mut state: TrackerState, beta: &AssociationVector, utility: f64) -> TrackerState {
    if state.best_beta.is_none() || utility > state.best_utility {
        state.best_beta = Some(beta.clone());
        state.best_utility = utility;
        state.best_round = Some(state.history.len());
    }
    state.history.push(utility);
    state
}

#[derive(Debug, Clone)]
pub struct MultiGameOutcome {
    pub best: AssociationVector,
    pub tracker: TrackerState,
    /// Every game played, in order.
    pub games: Vec<GameResult>,
}

pub fn run_multigame(cfg: &MultiGameConfig, ctx: &RateContext, mask: &RangeMask) -> Result<MultiGameOutcome> {
    if cfg.rounds == 0 {
        return Err(SimError::Config("multigame rounds must be at least 1".into()));
    }
    let quotas = ctx.topology().quotas();
    let mut prefs = build_by_channel_norm(ctx.channels(), mask);
    let mut tracker = TrackerState::default();
    let mut games: Vec<GameResult> = Vec::with_capacity(cfg.rounds);
    for round in 0..cfg.rounds {
        if round > 0 {
            let prev = &games[round - 1].beta;
            prefs = build_by_rate(ctx, prev, mask)?;
        }
        let result = play(cfg.inner, &GameInput::new(prefs.clone(), quotas.clone())?);
        let utility = ctx.utility(&result.beta)?;
        tracker = tracker_update(tracker, &result.beta, utility);
        let repeat = round > 0 && games[round - 1].beta == result.beta;
        games.push(result);
        if cfg.early_exit && repeat {
            break;
        }
    }
    let best = tracker.best_beta.clone().expect("at least one round played");
    Ok(MultiGameOutcome { best, tracker, games })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn av(v: &[Option<usize>]) -> AssociationVector {
        AssociationVector::from_vec(v.to_vec())
    }

    #[test]
    fn lower_utility_only_extends_history() {
        let s = tracker_update(TrackerState::default(), &av(&[Some(0)]), 5.0);
        let s = tracker_update(s, &av(&[None]), 3.0);
        assert_eq!(s.best_beta, Some(av(&[Some(0)])));
        assert_eq!(s.best_utility, 5.0);
        assert_eq!(s.history, vec![5.0, 3.0]);
    }

    #[test]
    fn higher_utility_replaces_best() {
        let s = tracker_update(TrackerState::default(), &av(&[None]), 1.0);
        let s = tracker_update(s, &av(&[Some(0)]), 2.0);
        assert_eq!(s.best_beta, Some(av(&[Some(0)])));
        assert_eq!(s.best_round, Some(1));
    }

    #[test]
    fn ties_keep_the_earlier_round() {
        let s = tracker_update(TrackerState::default(), &av(&[Some(0)]), 2.0);
        let s = tracker_update(s, &av(&[Some(1)]), 2.0);
        assert_eq!(s.best_beta, Some(av(&[Some(0)])));
        assert_eq!(s.best_round, Some(0));
    }
}
