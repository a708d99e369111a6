#![allow(dead_code)]

pub mod oracles;

use hetmatch::beamrate::dbm_to_w;
use hetmatch::netmodel::ring_positions;
use hetmatch::{
    ChannelParams, ChannelSet, GameInput, LayoutParams, NoiseParams, Point, PreferenceLists, RateContext, UpaShape,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A compact two-tier layout with small arrays so exhaustive checks stay cheap.
pub fn small_layout(macros: usize, smalls: usize, quota: usize, streams: usize) -> LayoutParams {
    let center = Point::new(100.0, 100.0);
    LayoutParams {
        area: (200.0, 200.0),
        macro_positions: ring_positions(center, if macros > 1 { 50.0 } else { 0.0 }, macros),
        small_positions: ring_positions(center, 60.0, smalls),
        macro_quota: quota,
        small_quota: quota,
        macro_antennas: 4,
        small_upa: UpaShape::new(2, 2),
        ue_upa: UpaShape::new(2, 2),
        ue_streams: streams,
        macro_power_w: dbm_to_w(40.0),
        small_power_w: dbm_to_w(30.0),
        macro_carrier_hz: 1.8e9,
        small_carrier_hz: 28e9,
    }
}

pub fn context(layout: &LayoutParams, ue_count: usize, seed: u64) -> RateContext {
    let mut r = rng(seed);
    let topo = layout.realize(ue_count, &mut r).unwrap();
    let channels = ChannelSet::generate(&mut r, &topo, &ChannelParams::default());
    RateContext::new(topo, channels, &NoiseParams::default()).unwrap()
}

/// Random instance where every UE lists every BS and vice versa.
pub fn full_lists<R: Rng>(rng: &mut R, num_bs: usize, num_ue: usize) -> PreferenceLists {
    let ue = (0..num_ue)
        .map(|_| {
            let mut v: Vec<usize> = (0..num_bs).collect();
            v.shuffle(rng);
            v
        })
        .collect();
    let bs = (0..num_bs)
        .map(|_| {
            let mut v: Vec<usize> = (0..num_ue).collect();
            v.shuffle(rng);
            v
        })
        .collect();
    PreferenceLists::from_orders(ue, bs)
}

/// Random instance with a symmetric acceptability mask (a pair is either on
/// both lists or on neither).
pub fn partial_lists<R: Rng>(rng: &mut R, num_bs: usize, num_ue: usize, keep: f64) -> PreferenceLists {
    let ok: Vec<Vec<bool>> = (0..num_ue)
        .map(|_| (0..num_bs).map(|_| rng.random::<f64>() < keep).collect())
        .collect();
    let full = full_lists(rng, num_bs, num_ue);
    let ue = (0..num_ue)
        .map(|k| full.ue_order(k).into_iter().filter(|&j| ok[k][j]).collect())
        .collect();
    let bs = (0..num_bs)
        .map(|j| full.bs_order(j).into_iter().filter(|&k| ok[k][j]).collect())
        .collect();
    PreferenceLists::from_orders(ue, bs)
}

pub fn random_quotas<R: Rng>(rng: &mut R, num_bs: usize, max: usize) -> Vec<usize> {
    (0..num_bs).map(|_| rng.random_range(1..=max)).collect()
}

pub fn input(prefs: PreferenceLists, quotas: Vec<usize>) -> GameInput {
    GameInput::new(prefs, quotas).unwrap()
}
