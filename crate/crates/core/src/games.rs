//! Distributed many-to-one matching games played in synchronous rounds.
//!
//! Every round, each UE in the rejection set sends one application; BSs
//! answer the whole batch at once. [`run_da`] keeps waiting lists and only
//! finalizes at termination. The early-acceptance family answers with an
//! immediate accept or reject:
//!
//! * [`run_ea_base`]: accept iff the UE is in the top `q_j` of the BS's
//!   original list and quota remains; no list updates, no reapplication.
//! * [`run_ea_plu`]: associated UEs leave every BS list, quotas shrink and a
//!   full BS broadcasts so UEs skip it from then on.
//! * [`run_ea_plu_ra`]: as EA-PLU, but a UE that reaches the end of its
//!   updated list starts over from the top until accepted or the list is
//!   empty.
//!
//! Within one batch a BS considers applicants in its own preference order,
//! then by UE index.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::netmodel::AssociationVector;
use crate::prefs::PreferenceLists;

/// Preference lists plus quotas: the full input of one game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInput {
    pub prefs: PreferenceLists,
    pub quotas: Vec<usize>,
}

impl GameInput {
    pub fn new(prefs: PreferenceLists, quotas: Vec<usize>) -> Result<Self> {
        if prefs.num_bs() != quotas.len() {
            return Err(SimError::Dimension(format!(
                "{} BS preference lists but {} quotas",
                prefs.num_bs(),
                quotas.len()
            )));
        }
        let (kk, jj) = (prefs.num_ue(), quotas.len());
        for (k, l) in prefs.ue_lists.iter().enumerate() {
            if let Some(bad) = l.iter().find(|r| r.index >= jj) {
                return Err(SimError::Dimension(format!("UE {k} lists unknown BS {}", bad.index)));
            }
        }
        for (j, l) in prefs.bs_lists.iter().enumerate() {
            if let Some(bad) = l.iter().find(|r| r.index >= kk) {
                return Err(SimError::Dimension(format!("BS {j} lists unknown UE {}", bad.index)));
            }
        }
        Ok(Self { prefs, quotas })
    }

    pub fn num_ue(&self) -> usize {
        self.prefs.num_ue()
    }

    pub fn num_bs(&self) -> usize {
        self.quotas.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameKind {
    #[serde(rename = "da")]
    Da,
    #[serde(rename = "ea-base")]
    EaBase,
    #[serde(rename = "ea-plu")]
    EaPlu,
    #[serde(rename = "ea-plu-ra")]
    EaPluRa,
}

impl GameKind {
    pub const ALL: [GameKind; 4] = [GameKind::Da, GameKind::EaBase, GameKind::EaPlu, GameKind::EaPluRa];

    pub fn name(&self) -> &'static str {
        match self {
            GameKind::Da => "da",
            GameKind::EaBase => "ea-base",
            GameKind::EaPlu => "ea-plu",
            GameKind::EaPluRa => "ea-plu-ra",
        }
    }

    pub fn is_early_acceptance(&self) -> bool {
        !matches!(self, GameKind::Da)
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GameKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        GameKind::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown game `{s}` (da | ea-base | ea-plu | ea-plu-ra)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Message {
    Application { ue: usize, bs: usize },
    Accept { bs: usize, ue: usize },
    Reject { bs: usize, ue: usize },
    Waitlist { bs: usize, ue: usize },
    QuotaExhausted { bs: usize },
}

impl Message {
    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Application { .. } => "application",
            Message::Accept { .. } => "accept",
            Message::Reject { .. } => "reject",
            Message::Waitlist { .. } => "waitlist",
            Message::QuotaExhausted { .. } => "quota-exhausted",
        }
    }

    pub fn ue(&self) -> Option<usize> {
        match *self {
            Message::Application { ue, .. }
            | Message::Accept { ue, .. }
            | Message::Reject { ue, .. }
            | Message::Waitlist { ue, .. } => Some(ue),
            Message::QuotaExhausted { .. } => None,
        }
    }

    pub fn bs(&self) -> usize {
        match *self {
            Message::Application { bs, .. }
            | Message::Accept { bs, .. }
            | Message::Reject { bs, .. }
            | Message::Waitlist { bs, .. }
            | Message::QuotaExhausted { bs } => bs,
        }
    }
}

/// Full message log of one game plus per-UE counters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GameTrace {
    /// `rounds[n]` holds the messages of iteration `n + 1`.
    pub rounds: Vec<Vec<Message>>,
    /// `N_appl_k`.
    pub applications: Vec<u32>,
    /// Iteration at which each UE's association became final.
    pub associated_at: Vec<Option<u32>>,
    /// `N_iter`.
    pub iterations: u32,
}

impl GameTrace {
    fn new(k: usize) -> Self {
        Self {
            rounds: Vec::new(),
            applications: vec![0; k],
            associated_at: vec![None; k],
            iterations: 0,
        }
    }

    /// Tab-separated `iter type ue bs` lines, `-` for a missing UE.
    pub fn write_event_log<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (n, msgs) in self.rounds.iter().enumerate() {
            for m in msgs {
                let ue = m.ue().map_or_else(|| "-".to_string(), |u| u.to_string());
                writeln!(w, "{}\t{}\t{}\t{}", n + 1, m.type_name(), ue, m.bs())?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameResult {
    pub kind: GameKind,
    pub beta: AssociationVector,
    pub unassociated: Vec<usize>,
    pub trace: GameTrace,
}

impl GameResult {
    fn finish(kind: GameKind, beta: AssociationVector, trace: GameTrace) -> Self {
        let unassociated = beta.unassociated_set();
        Self {
            kind,
            beta,
            unassociated,
            trace,
        }
    }
}

pub fn play(kind: GameKind, input: &GameInput) -> GameResult {
    match kind {
        GameKind::Da => run_da(input),
        GameKind::EaBase => run_ea_base(input),
        GameKind::EaPlu => run_ea_plu(input),
        GameKind::EaPluRa => run_ea_plu_ra(input),
    }
}

/// Deferred acceptance with waiting lists.
pub fn run_da(input: &GameInput) -> GameResult {
    let (kk, jj) = (input.num_ue(), input.num_bs());
    let lists: Vec<Vec<usize>> = (0..kk).map(|k| input.prefs.ue_order(k)).collect();
    let ranks = input.prefs.bs_ranks();
    let mut trace = GameTrace::new(kk);
    let mut pointer = vec![0usize; kk];
    let mut waiting: Vec<Vec<usize>> = vec![Vec::new(); jj];
    let mut rejection: Vec<usize> = (0..kk).filter(|&k| !lists[k].is_empty()).collect();

    while !rejection.is_empty() {
        let mut msgs = Vec::new();
        let mut applicants: Vec<Vec<usize>> = vec![Vec::new(); jj];
        for &k in &rejection {
            let j = lists[k][pointer[k]];
            trace.applications[k] += 1;
            msgs.push(Message::Application { ue: k, bs: j });
            applicants[j].push(k);
        }
        let mut rejected = Vec::new();
        for j in 0..jj {
            if applicants[j].is_empty() {
                continue;
            }
            let (listed, unlisted): (Vec<usize>, Vec<usize>) =
                applicants[j].iter().partition(|&&k| ranks[j][k].is_some());
            let mut pool: Vec<usize> = waiting[j].iter().copied().chain(listed.iter().copied()).collect();
            pool.sort_by_key(|&k| (ranks[j][k], k));
            let keep = pool.len().min(input.quotas[j]);
            let (kept, dropped) = pool.split_at(keep);
            for &k in &listed {
                if kept.contains(&k) {
                    msgs.push(Message::Waitlist { bs: j, ue: k });
                }
            }
            for &k in dropped.iter().chain(&unlisted) {
                msgs.push(Message::Reject { bs: j, ue: k });
                rejected.push(k);
            }
            waiting[j] = kept.to_vec();
        }
        rejected.sort_unstable();
        rejection.clear();
        for k in rejected {
            pointer[k] += 1;
            if pointer[k] < lists[k].len() {
                rejection.push(k);
            }
        }
        trace.rounds.push(msgs);
        trace.iterations += 1;
    }

    let mut beta = AssociationVector::unassociated(kk);
    for (j, w) in waiting.iter().enumerate() {
        for &k in w {
            beta.set(k, Some(j));
            trace.associated_at[k] = Some(trace.iterations);
        }
    }
    GameResult::finish(GameKind::Da, beta, trace)
}

pub fn run_ea_base(input: &GameInput) -> GameResult {
    run_early_acceptance(input, GameKind::EaBase)
}

pub fn run_ea_plu(input: &GameInput) -> GameResult {
    run_early_acceptance(input, GameKind::EaPlu)
}

pub fn run_ea_plu_ra(input: &GameInput) -> GameResult {
    run_early_acceptance(input, GameKind::EaPluRa)
}

fn run_early_acceptance(input: &GameInput, kind: GameKind) -> GameResult {
    let updates = matches!(kind, GameKind::EaPlu | GameKind::EaPluRa);
    let reapply = kind == GameKind::EaPluRa;
    let (kk, jj) = (input.num_ue(), input.num_bs());
    let lists: Vec<Vec<usize>> = (0..kk).map(|k| input.prefs.ue_order(k)).collect();
    let bs_orders: Vec<Vec<usize>> = (0..jj).map(|j| input.prefs.bs_order(j)).collect();
    let ranks = input.prefs.bs_ranks();

    let mut trace = GameTrace::new(kk);
    let mut beta = AssociationVector::unassociated(kk);
    let mut quota_left = input.quotas.clone();
    let mut removed = vec![false; jj];
    let mut last_pos: Vec<Option<usize>> = vec![None; kk];
    let mut rejection: Vec<usize> = (0..kk).collect();
    // BSs that rejected each UE since the last association anywhere.
    let mut stale: Vec<Vec<bool>> = vec![vec![false; jj]; kk];

    loop {
        let mut targets = Vec::with_capacity(rejection.len());
        for &k in &rejection {
            let list = &lists[k];
            let open = |p: &usize| !removed[list[*p]];
            let start = last_pos[k].map_or(0, |p| p + 1);
            let mut next = (start..list.len()).find(open);
            if next.is_none() && reapply {
                next = (0..start.min(list.len())).find(open);
            }
            if let Some(p) = next {
                targets.push((k, p));
            }
        }
        if targets.is_empty() {
            break;
        }
        if reapply
            && targets.iter().all(|&(k, _)| {
                lists[k].iter().all(|&j| removed[j] || stale[k][j])
            })
        {
            // No association since every UE was last turned down by every
            // BS it can still reach: the state can no longer change.
            break;
        }

        let mut msgs = Vec::new();
        let mut applicants: Vec<Vec<usize>> = vec![Vec::new(); jj];
        for &(k, p) in &targets {
            let j = lists[k][p];
            last_pos[k] = Some(p);
            trace.applications[k] += 1;
            msgs.push(Message::Application { ue: k, bs: j });
            applicants[j].push(k);
        }

        // Acceptance windows fixed at the start of the round.
        let window: Vec<Vec<bool>> = (0..jj)
            .map(|j| {
                let mut inside = vec![false; kk];
                if updates {
                    bs_orders[j]
                        .iter()
                        .filter(|&&k| beta.get(k).is_none())
                        .take(quota_left[j])
                        .for_each(|&k| inside[k] = true);
                } else {
                    bs_orders[j].iter().take(input.quotas[j]).for_each(|&k| inside[k] = true);
                }
                inside
            })
            .collect();

        let mut accepted_any = false;
        let mut exhausted = Vec::new();
        for j in 0..jj {
            let apps = &mut applicants[j];
            if apps.is_empty() {
                continue;
            }
            apps.sort_by_key(|&k| (ranks[j][k].unwrap_or(usize::MAX), k));
            for &k in apps.iter() {
                if window[j][k] && quota_left[j] > 0 {
                    quota_left[j] -= 1;
                    beta.set(k, Some(j));
                    trace.associated_at[k] = Some(trace.iterations + 1);
                    msgs.push(Message::Accept { bs: j, ue: k });
                    accepted_any = true;
                } else {
                    msgs.push(Message::Reject { bs: j, ue: k });
                    stale[k][j] = true;
                }
            }
            if updates && quota_left[j] == 0 && !removed[j] {
                exhausted.push(j);
            }
        }
        for j in exhausted {
            removed[j] = true;
            msgs.push(Message::QuotaExhausted { bs: j });
        }
        if accepted_any {
            stale.iter_mut().for_each(|row| row.fill(false));
        }

        rejection = targets
            .iter()
            .map(|&(k, _)| k)
            .filter(|&k| beta.get(k).is_none())
            .collect();
        trace.rounds.push(msgs);
        trace.iterations += 1;
        if rejection.is_empty() {
            break;
        }
    }
    GameResult::finish(kind, beta, trace)
}

/// Outcome of a blocking-pair search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    /// UE `ue` and BS `bs` both prefer each other to what `beta` gives them.
    Blocking { ue: usize, bs: usize },
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }
}

/// Searches for a blocking pair, scanning UEs in index order and each UE's
/// list from the top. A BS blocks with `k` if it lists `k` and either has
/// spare quota or holds a member it ranks below `k`.
pub fn is_stable(beta: &AssociationVector, input: &GameInput) -> Stability {
    let jj = input.num_bs();
    let ranks = input.prefs.bs_ranks();
    let loads = beta.loads(jj);
    let worst: Vec<usize> = (0..jj)
        .map(|j| {
            beta.activation_set(j)
                .into_iter()
                .map(|k| ranks[j].get(k).copied().flatten().unwrap_or(usize::MAX))
                .max()
                .unwrap_or(0)
        })
        .collect();
    for (k, list) in input.prefs.ue_lists.iter().enumerate() {
        for entry in list {
            let j = entry.index;
            if beta.get(k) == Some(j) {
                break;
            }
            let Some(rank) = ranks[j][k] else { continue };
            if loads[j] < input.quotas[j] || rank < worst[j] {
                return Stability::Blocking { ue: k, bs: j };
            }
        }
    }
    Stability::Stable
}
