//! Reference association schemes: max-SINR, uniform random, and a
//! centralized swap hill-climb used as the upper-bound benchmark.

use rand::Rng;

use crate::beamrate::RateContext;
use crate::error::Result;
use crate::netmodel::AssociationVector;

/// Keeps the `quota` best requesters of every BS and drops the rest.
/// `requests[k]` is UE `k`'s chosen BS, `score[k]` its priority (higher
/// wins, ties to the lower UE index).
fn admit(requests: &[usize], score: impl Fn(usize) -> f64, quotas: &[usize]) -> AssociationVector {
    let mut beta = AssociationVector::unassociated(requests.len());
    for (j, &quota) in quotas.iter().enumerate() {
        let mut ues: Vec<usize> = (0..requests.len()).filter(|&k| requests[k] == j).collect();
        ues.sort_by(|a, b| score(*b).total_cmp(&score(*a)).then(a.cmp(b)));
        for &k in ues.iter().take(quota) {
            beta.set(k, Some(j));
        }
    }
    beta
}

/// Every UE requests its highest-SINR BS (ties to the lower BS index);
/// overloaded BSs keep their highest-SINR requesters.
pub fn max_sinr_association(sinr: &[Vec<f64>], quotas: &[usize]) -> AssociationVector {
    let requests: Vec<usize> = sinr
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, s)| if *s > best.1 { (j, *s) } else { best })
                .0
        })
        .collect();
    admit(&requests, |k| sinr[k][requests[k]], quotas)
}

/// Every UE draws a BS uniformly; overloaded BSs keep the lowest UE indices.
pub fn random_association<R: Rng + ?Sized>(rng: &mut R, num_bs: usize, num_ue: usize, quotas: &[usize]) -> AssociationVector {
    let requests: Vec<usize> = (0..num_ue).map(|_| rng.random_range(0..num_bs)).collect();
    admit(&requests, |_| 0.0, quotas)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapOutcome {
    pub beta: AssociationVector,
    pub utility: f64,
    pub initial_utility: f64,
    /// Committed moves.
    pub moves: usize,
}

/// Hill-climb on the sum-rate utility.
///
/// Each sweep first tries to relocate the lowest-rate associated UE to
/// every other BS, swapping it with the target's lowest-rate member when
/// the target is full. If that gives no strict gain, it searches the wider
/// neighbourhood of relocations with one- and two-step displacement chains
/// (the displaced member moves to another BS, whose displaced member takes
/// the mover's old slot), plus dropping a UE. The best strict gain is
/// committed; the search stops when nothing improves or after `max_sweeps`.
pub fn centralized_swap(ctx: &RateContext, initial: &AssociationVector, max_sweeps: usize) -> Result<SwapOutcome> {
    let quotas = ctx.topology().quotas();
    let mut beta = initial.clone();
    let initial_utility = ctx.utility(&beta)?;
    let mut utility = initial_utility;
    let mut moves = 0;
    for _ in 0..max_sweeps {
        let rates = ctx.rates_under(&beta)?;
        let weakest = weakest_by_rate(&beta, &rates, quotas.len());
        let candidates = match worst_connection(&beta, &rates) {
            Some(w) => worst_first_moves(&beta, w, &quotas, &weakest),
            None => Vec::new(),
        };
        let mut best = best_of(ctx, candidates, utility)?;
        if best.is_none() {
            best = best_of(ctx, chain_moves(&beta, &quotas, &weakest), utility)?;
        }
        match best {
            Some((b, u)) => {
                beta = b;
                utility = u;
                moves += 1;
            }
            None => break,
        }
    }
    Ok(SwapOutcome {
        beta,
        utility,
        initial_utility,
        moves,
    })
}

fn best_of(ctx: &RateContext, candidates: Vec<AssociationVector>, floor: f64) -> Result<Option<(AssociationVector, f64)>> {
    let mut best: Option<(AssociationVector, f64)> = None;
    for cand in candidates {
        let u = ctx.utility(&cand)?;
        if u > best.as_ref().map_or(floor, |b| b.1) {
            best = Some((cand, u));
        }
    }
    Ok(best)
}

fn worst_connection(beta: &AssociationVector, rates: &[f64]) -> Option<usize> {
    (0..beta.len())
        .filter(|&k| beta.get(k).is_some())
        .min_by(|a, b| rates[*a].total_cmp(&rates[*b]).then(a.cmp(b)))
}

fn weakest_by_rate(beta: &AssociationVector, rates: &[f64], num_bs: usize) -> Vec<Option<usize>> {
    let mut weakest: Vec<Option<usize>> = vec![None; num_bs];
    for (k, b) in beta.iter().enumerate() {
        if let Some(j) = b {
            if weakest[j].is_none_or(|w| rates[k] < rates[w]) {
                weakest[j] = Some(k);
            }
        }
    }
    weakest
}

fn worst_first_moves(beta: &AssociationVector, w: usize, quotas: &[usize], weakest: &[Option<usize>]) -> Vec<AssociationVector> {
    let loads = beta.loads(quotas.len());
    let old = beta.get(w);
    (0..quotas.len())
        .filter(|&j| Some(j) != old)
        .map(|j| {
            let mut c = beta.clone();
            c.set(w, Some(j));
            if loads[j] >= quotas[j] {
                if let Some(y) = weakest[j] {
                    c.set(y, old);
                }
            }
            c
        })
        .collect()
}

fn chain_moves(beta: &AssociationVector, quotas: &[usize], weakest: &[Option<usize>]) -> Vec<AssociationVector> {
    let jj = quotas.len();
    let loads = beta.loads(jj);
    let mut out = Vec::new();
    for x in 0..beta.len() {
        let old = beta.get(x);
        if old.is_some() {
            let mut c = beta.clone();
            c.set(x, None);
            out.push(c);
        }
        for j in (0..jj).filter(|&j| Some(j) != old) {
            let mut c = beta.clone();
            c.set(x, Some(j));
            let Some(y) = weakest[j].filter(|_| loads[j] >= quotas[j]) else {
                out.push(c);
                continue;
            };
            // y takes x's old slot.
            let mut swap = c.clone();
            swap.set(y, old);
            out.push(swap);
            if old.is_some() {
                let mut drop = c.clone();
                drop.set(y, None);
                out.push(drop);
            }
            // y moves on to a third BS.
            for i in (0..jj).filter(|&i| i != j && Some(i) != old) {
                let mut chain = c.clone();
                chain.set(y, Some(i));
                if loads[i] >= quotas[i] {
                    if let Some(z) = weakest[i] {
                        chain.set(z, old);
                    }
                }
                out.push(chain);
            }
        }
    }
    out
}
