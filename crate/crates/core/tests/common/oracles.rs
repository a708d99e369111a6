//! Independent reference implementations shared by the oracle tests and
//! the acceptance suite.

use hetmatch::{AssociationVector, PreferenceLists, RateContext, Tier};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use hetmatch::netmodel::validate_association;

type CMat = DMatrix<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn members(beta: &AssociationVector, j: usize) -> Vec<usize> {
    (0..beta.len()).filter(|&l| beta.get(l) == Some(j)).collect()
}

/// Rate of UE `k` at its serving BS under `beta`, written out sum by sum.
pub fn oracle_rate(ctx: &RateContext, k: usize, beta: &AssociationVector) -> f64 {
    let Some(s) = beta.get(k) else { return 0.0 };
    let topo = ctx.topology();
    let ch = ctx.channels();
    let bf = ctx.beams();
    let tier = topo.tier(s);
    let power = |i: usize| topo.base_stations[i].tx_power_w / members(beta, i).len() as f64;
    let same_tier: Vec<usize> = (0..topo.num_bs()).filter(|&i| topo.tier(i) == tier).collect();
    let n0 = ctx.noise_w(s);
    match tier {
        Tier::Macro => {
            let h = |i: usize| ch.get(k, i).scaled();
            let eff = |i: usize, l: usize| (h(i) * bf.precoder(l, i))[(0, 0)];
            let signal = power(s) * eff(s, k).norm_sqr();
            let mut interference = 0.0;
            for &i in &same_tier {
                for l in members(beta, i) {
                    if l != k {
                        interference += power(i) * eff(i, l).norm_sqr();
                    }
                }
            }
            (1.0 + signal / (interference + n0)).log2()
        }
        Tier::Small => {
            let w = bf.combiner(k, s);
            let eff = |i: usize, l: usize| -> CMat { w.adjoint() * ch.get(k, i).scaled() * bf.precoder(l, i) };
            let hk = eff(s, k);
            let n = hk.nrows();
            let mut v = w.adjoint() * w * c(n0);
            for &i in &same_tier {
                for l in members(beta, i) {
                    if l != k {
                        let e = eff(i, l);
                        v += &e * e.adjoint() * c(power(i));
                    }
                }
            }
            let v_inv = v.clone().try_inverse().expect("covariance is invertible");
            let m = CMat::identity(n, n) + v_inv * &hk * hk.adjoint() * c(power(s));
            m.determinant().norm().log2()
        }
    }
}

/// Independent transcription of the switch convention: `k` moves to `j`;
/// a full `j` sends its lowest-rate member (lower index on ties) to `k`'s
/// old slot.
pub fn oracle_instantaneous(ctx: &RateContext, k: usize, j: usize, beta: &AssociationVector) -> f64 {
    if beta.get(k) == Some(j) {
        return oracle_rate(ctx, k, beta);
    }
    let mut hyp = beta.clone();
    let old = beta.get(k);
    hyp.set(k, Some(j));
    let at_j = members(beta, j);
    if at_j.len() >= ctx.topology().base_stations[j].quota {
        let rates: Vec<f64> = at_j.iter().map(|&l| oracle_rate(ctx, l, beta)).collect();
        let mut w = 0;
        for i in 1..at_j.len() {
            if rates[i] < rates[w] {
                w = i;
            }
        }
        hyp.set(at_j[w], old);
    }
    oracle_rate(ctx, k, &hyp)
}

pub fn random_beta<R: Rng>(rng: &mut R, ctx: &RateContext) -> AssociationVector {
    let quotas = ctx.topology().quotas();
    let mut loads = vec![0; quotas.len()];
    let mut beta = AssociationVector::unassociated(ctx.num_ue());
    for k in 0..ctx.num_ue() {
        let j = rng.random_range(0..=quotas.len());
        if j < quotas.len() && loads[j] < quotas[j] {
            loads[j] += 1;
            beta.set(k, Some(j));
        }
    }
    beta
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// One-proposal-at-a-time deferred acceptance with quotas. A BS only holds
/// UEs on its list; a full BS bounces its least preferred holder.
pub fn textbook_da(prefs: &PreferenceLists, quotas: &[usize]) -> AssociationVector {
    let (kk, jj) = (prefs.num_ue(), prefs.num_bs());
    let rank: Vec<Vec<Option<usize>>> = prefs.bs_ranks();
    let lists: Vec<Vec<usize>> = (0..kk).map(|k| prefs.ue_order(k)).collect();
    let mut next = vec![0usize; kk];
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); jj];
    let mut free: Vec<usize> = (0..kk).rev().collect();
    while let Some(k) = free.pop() {
        let Some(&j) = lists[k].get(next[k]) else { continue };
        next[k] += 1;
        let Some(rk) = rank[j][k] else {
            free.push(k);
            continue;
        };
        if held[j].len() < quotas[j] {
            held[j].push(k);
            continue;
        }
        let (pos, worst) = held[j]
            .iter()
            .enumerate()
            .max_by_key(|(_, &l)| rank[j][l].expect("held UEs are listed"))
            .map(|(p, &l)| (p, l))
            .expect("quota is at least one");
        if rk < rank[j][worst].unwrap() {
            held[j][pos] = k;
            free.push(worst);
        } else {
            free.push(k);
        }
    }
    let mut beta = AssociationVector::unassociated(kk);
    for (j, hs) in held.iter().enumerate() {
        for &k in hs {
            beta.set(k, Some(j));
        }
    }
    beta
}

/// Every quota-respecting association, including partial ones.
pub fn all_associations(num_ue: usize, quotas: &[usize]) -> Vec<AssociationVector> {
    let options = quotas.len() + 1;
    let mut out = Vec::new();
    for code in 0..options.pow(num_ue as u32) {
        let mut c = code;
        let v: Vec<Option<usize>> = (0..num_ue)
            .map(|_| {
                let d = c % options;
                c /= options;
                (d < quotas.len()).then_some(d)
            })
            .collect();
        let beta = AssociationVector::from_vec(v);
        if validate_association(&beta, quotas, num_ue).unwrap().is_ok() {
            out.push(beta);
        }
    }
    out
}

pub fn optimum(ctx: &RateContext) -> f64 {
    all_associations(ctx.num_ue(), &ctx.topology().quotas())
        .iter()
        .map(|b| ctx.utility(b).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

