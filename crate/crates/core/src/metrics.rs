//! Per-trial evaluation metrics and cross-trial aggregation.
//!
//! Delay is counted in iterations (one application plus its response) and
//! power in applications. UEs that end unassociated are left out of the
//! delay and power samples and only show up in the unassociated fraction.

use serde::{Deserialize, Serialize};

use crate::games::{GameKind, GameResult, GameTrace};
use crate::netmodel::AssociationVector;

/// Per-UE association delay, `None` for UEs that never associated. DA
/// finalizes everybody at the last iteration; EA games at the UE's own
/// application count.
pub fn association_delay(trace: &GameTrace, kind: GameKind) -> Vec<Option<u32>> {
    trace
        .associated_at
        .iter()
        .zip(&trace.applications)
        .map(|(at, appl)| {
            at.map(|_| match kind {
                GameKind::Da => trace.iterations,
                _ => *appl,
            })
        })
        .collect()
}

/// Per-UE applications sent, one power unit each.
pub fn association_power(trace: &GameTrace) -> Vec<u32> {
    trace.applications.clone()
}

pub fn unassociated_fraction(beta: &AssociationVector) -> f64 {
    if beta.is_empty() {
        return 0.0;
    }
    beta.unassociated_set().len() as f64 / beta.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    /// Delay samples of associated UEs.
    pub delays: Vec<f64>,
    /// Power samples of associated UEs.
    pub powers: Vec<f64>,
    pub unassociated_fraction: f64,
    pub utility: f64,
    pub iterations: u32,
}

impl TrialMetrics {
    pub fn from_game(result: &GameResult, utility: f64) -> Self {
        let delay = association_delay(&result.trace, result.kind);
        let power = association_power(&result.trace);
        let mut delays = Vec::new();
        let mut powers = Vec::new();
        for (d, p) in delay.iter().zip(&power) {
            if let Some(d) = d {
                delays.push(*d as f64);
                powers.push(*p as f64);
            }
        }
        Self {
            delays,
            powers,
            unassociated_fraction: unassociated_fraction(&result.beta),
            utility,
            iterations: result.trace.iterations,
        }
    }

    /// Metrics for schemes that have no message exchange.
    pub fn without_trace(beta: &AssociationVector, utility: f64) -> Self {
        Self {
            delays: Vec::new(),
            powers: Vec::new(),
            unassociated_fraction: unassociated_fraction(beta),
            utility,
            iterations: 0,
        }
    }

    pub fn avg_delay(&self) -> Option<f64> {
        mean(&self.delays)
    }

    pub fn avg_power(&self) -> Option<f64> {
        mean(&self.powers)
    }
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Linear-interpolation percentile, `q` in `[0, 100]`.
pub fn percentile(xs: &[f64], q: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Summary of one sample population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub min: f64,
    pub max: f64,
    /// Unit-width bins: `(bin start, probability mass)`.
    pub pdf: Vec<(f64, f64)>,
    /// `(bin start, cumulative mass)` over the same bins.
    pub cdf: Vec<(f64, f64)>,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Self> {
        let mean = mean(xs)?;
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let first = min.floor();
        let bins = (max.floor() - first) as usize + 1;
        let mut counts = vec![0usize; bins];
        for x in xs {
            counts[(x.floor() - first) as usize] += 1;
        }
        let n = xs.len() as f64;
        let pdf: Vec<(f64, f64)> = counts
            .iter()
            .enumerate()
            .map(|(i, c)| (first + i as f64, *c as f64 / n))
            .collect();
        let mut acc = 0.0;
        let cdf = pdf
            .iter()
            .map(|(x, p)| {
                acc += p;
                (*x, acc)
            })
            .collect();
        Some(Self {
            count: xs.len(),
            mean,
            p25: percentile(xs, 25.0)?,
            median: percentile(xs, 50.0)?,
            p75: percentile(xs, 75.0)?,
            min,
            max,
            pdf,
            cdf,
        })
    }
}

/// Cross-trial reduction for one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    /// Pooled per-UE delay samples.
    pub delay: Option<Summary>,
    /// Pooled per-UE power samples.
    pub power: Option<Summary>,
    pub unassociated: Summary,
    pub utility: Summary,
    pub iterations: Summary,
}

pub fn aggregate(trials: &[TrialMetrics]) -> Option<Aggregate> {
    if trials.is_empty() {
        return None;
    }
    let pooled = |f: fn(&TrialMetrics) -> &Vec<f64>| -> Vec<f64> { trials.iter().flat_map(|t| f(t).iter().copied()).collect() };
    let per_trial = |f: fn(&TrialMetrics) -> f64| -> Vec<f64> { trials.iter().map(f).collect() };
    Some(Aggregate {
        trials: trials.len(),
        delay: Summary::of(&pooled(|t| &t.delays)),
        power: Summary::of(&pooled(|t| &t.powers)),
        unassociated: Summary::of(&per_trial(|t| t.unassociated_fraction))?,
        utility: Summary::of(&per_trial(|t| t.utility))?,
        iterations: Summary::of(&per_trial(|t| t.iterations as f64))?,
    })
}
