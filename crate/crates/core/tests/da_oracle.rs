//! Deferred acceptance against a sequential textbook implementation and an
//! exhaustive blocking-pair scan.

mod common;

use hetmatch::games::run_da;
use common::oracles::textbook_da;
use hetmatch::{is_stable, AssociationVector, GameInput, Stability};
use rand::Rng;

fn brute_force_blocking(beta: &AssociationVector, input: &GameInput) -> Option<(usize, usize)> {
    let p = &input.prefs;
    let ue_rank = p.ue_ranks();
    let bs_rank = p.bs_ranks();
    for k in 0..p.num_ue() {
        for j in p.ue_order(k) {
            let ue_wants = match beta.get(k) {
                None => true,
                Some(cur) => ue_rank[k][j] < ue_rank[k][cur],
            };
            if !ue_wants || bs_rank[j][k].is_none() {
                continue;
            }
            let members = beta.activation_set(j);
            let bs_wants = members.len() < input.quotas[j]
                || members.iter().any(|&l| bs_rank[j][k] < bs_rank[j][l]);
            if bs_wants {
                return Some((k, j));
            }
        }
    }
    None
}

#[test]
fn matches_textbook_deferred_acceptance() {
    let mut r = common::rng(2024);
    for _ in 0..2000 {
        let jj = r.random_range(1..=6);
        let kk = r.random_range(0..=25);
        let quotas = common::random_quotas(&mut r, jj, 6);
        let prefs = if r.random_bool(0.5) {
            common::full_lists(&mut r, jj, kk)
        } else {
            common::partial_lists(&mut r, jj, kk, 0.6)
        };
        let want = textbook_da(&prefs, &quotas);
        let input = common::input(prefs, quotas);
        assert_eq!(run_da(&input).beta, want);
    }
}

#[test]
fn da_output_is_stable_on_random_instances() {
    let mut r = common::rng(7);
    for _ in 0..1000 {
        let jj = r.random_range(1..=8);
        let kk = r.random_range(0..=40);
        let quotas = common::random_quotas(&mut r, jj, 8);
        let prefs = if r.random_bool(0.5) {
            common::full_lists(&mut r, jj, kk)
        } else {
            common::partial_lists(&mut r, jj, kk, 0.5)
        };
        let input = common::input(prefs, quotas);
        let beta = run_da(&input).beta;
        assert_eq!(is_stable(&beta, &input), Stability::Stable);
        assert_eq!(brute_force_blocking(&beta, &input), None);
    }
}

#[test]
fn stability_checker_agrees_with_brute_force() {
    let mut r = common::rng(8);
    for _ in 0..1000 {
        let jj = r.random_range(1..=4);
        let kk = r.random_range(1..=8);
        let quotas = common::random_quotas(&mut r, jj, 3);
        let prefs = common::partial_lists(&mut r, jj, kk, 0.7);
        let input = common::input(prefs, quotas.clone());
        // A random quota-respecting matching over listed pairs.
        let mut beta = AssociationVector::unassociated(kk);
        let mut loads = vec![0; jj];
        let bs_rank = input.prefs.bs_ranks();
        for k in 0..kk {
            let opts: Vec<usize> = input
                .prefs
                .ue_order(k)
                .into_iter()
                .filter(|&j| loads[j] < quotas[j] && bs_rank[j][k].is_some())
                .collect();
            if !opts.is_empty() && r.random_bool(0.7) {
                let j = opts[r.random_range(0..opts.len())];
                loads[j] += 1;
                beta.set(k, Some(j));
            }
        }
        let blocking = brute_force_blocking(&beta, &input);
        match is_stable(&beta, &input) {
            Stability::Stable => assert_eq!(blocking, None),
            Stability::Blocking { ue, bs } => {
                assert!(blocking.is_some());
                // The witness itself must be a genuine blocking pair.
                let single = brute_force_witness_ok(&beta, &input, ue, bs);
                assert!(single, "({ue}, {bs}) is not blocking");
            }
        }
    }
}

fn brute_force_witness_ok(beta: &AssociationVector, input: &GameInput, k: usize, j: usize) -> bool {
    let ue_rank = input.prefs.ue_ranks();
    let bs_rank = input.prefs.bs_ranks();
    let (Some(uj), Some(bk)) = (ue_rank[k][j], bs_rank[j][k]) else { return false };
    let ue_wants = beta.get(k).is_none_or(|cur| ue_rank[k][cur].is_some_and(|c| uj < c));
    let members = beta.activation_set(j);
    let bs_wants = members.len() < input.quotas[j] || members.iter().any(|&l| bs_rank[j][l].is_some_and(|r| bk < r));
    ue_wants && bs_wants && beta.get(k) != Some(j)
}
