mod common;

use hetmatch::games::Message;
use hetmatch::metrics::{association_delay, association_power};
use hetmatch::netmodel::validate_association;
use hetmatch::{play, GameKind};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (usize, usize, u64, bool)> {
    (1usize..=8, 0usize..=40, any::<u64>(), any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_game_returns_a_valid_association((jj, kk, seed, full) in instance()) {
        let mut r = common::rng(seed);
        let quotas = common::random_quotas(&mut r, jj, 8);
        let prefs = if full { common::full_lists(&mut r, jj, kk) } else { common::partial_lists(&mut r, jj, kk, 0.5) };
        let input = common::input(prefs, quotas.clone());
        let bs_rank = input.prefs.bs_ranks();
        for kind in GameKind::ALL {
            let res = play(kind, &input);
            prop_assert_eq!(validate_association(&res.beta, &quotas, kk).unwrap(), Ok(()));
            for k in 0..kk {
                if let Some(j) = res.beta.get(k) {
                    prop_assert!(input.prefs.ue_order(k).contains(&j));
                    prop_assert!(bs_rank[j][k].is_some());
                }
            }
            prop_assert_eq!(res.unassociated.clone(), res.beta.unassociated_set());
            prop_assert_eq!(res.trace.rounds.len() as u32, res.trace.iterations);
            // Every application shows up in the message log.
            let mut sent = vec![0u32; kk];
            for m in res.trace.rounds.iter().flatten() {
                if let Message::Application { ue, .. } = m {
                    sent[*ue] += 1;
                }
            }
            prop_assert_eq!(&sent, &res.trace.applications);
        }
    }

    #[test]
    fn no_reapplication_games_finish_within_j((jj, kk, seed, full) in instance()) {
        let mut r = common::rng(seed);
        let quotas = common::random_quotas(&mut r, jj, 8);
        let prefs = if full { common::full_lists(&mut r, jj, kk) } else { common::partial_lists(&mut r, jj, kk, 0.5) };
        let input = common::input(prefs, quotas);
        for kind in [GameKind::EaBase, GameKind::EaPlu] {
            let res = play(kind, &input);
            prop_assert!(res.trace.iterations as usize <= jj);
            prop_assert!(res.trace.applications.iter().all(|&a| a as usize <= jj));
        }
        prop_assert!(play(GameKind::Da, &input).trace.applications.iter().all(|&a| a as usize <= jj));
    }

    #[test]
    fn early_acceptance_delay_equals_power((jj, kk, seed, full) in instance()) {
        let mut r = common::rng(seed);
        let quotas = common::random_quotas(&mut r, jj, 8);
        let prefs = if full { common::full_lists(&mut r, jj, kk) } else { common::partial_lists(&mut r, jj, kk, 0.5) };
        let input = common::input(prefs, quotas);
        for kind in [GameKind::EaBase, GameKind::EaPlu, GameKind::EaPluRa] {
            let res = play(kind, &input);
            let delay = association_delay(&res.trace, kind);
            let power = association_power(&res.trace);
            for k in 0..kk {
                match delay[k] {
                    Some(d) => {
                        prop_assert_eq!(d, power[k]);
                        prop_assert_eq!(res.trace.associated_at[k], Some(d));
                    }
                    None => prop_assert_eq!(res.beta.get(k), None),
                }
            }
        }
        let da = play(GameKind::Da, &input);
        for d in association_delay(&da.trace, GameKind::Da).into_iter().flatten() {
            prop_assert_eq!(d, da.trace.iterations);
        }
    }

    #[test]
    fn full_lists_fill_every_seat_up_to_capacity((jj, seed) in (1usize..=8, any::<u64>()), load in 0.5f64..1.5) {
        let mut r = common::rng(seed);
        let quotas = common::random_quotas(&mut r, jj, 8);
        let cap: usize = quotas.iter().sum();
        let kk = ((cap as f64) * load).round() as usize;
        let input = common::input(common::full_lists(&mut r, jj, kk), quotas);
        let seats = kk.min(cap);
        let da = play(GameKind::Da, &input);
        let ra = play(GameKind::EaPluRa, &input);
        prop_assert_eq!(da.beta.associated_count(), seats);
        prop_assert_eq!(ra.beta.associated_count(), seats);
        let base = play(GameKind::EaBase, &input);
        prop_assert!(base.beta.associated_count() <= ra.beta.associated_count());
    }

    #[test]
    fn reapplication_bound_under_critical_load(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let quotas = vec![15, 5, 5, 5, 5];
        let input = common::input(common::full_lists(&mut r, 5, 35), quotas);
        let res = play(GameKind::EaPluRa, &input);
        prop_assert!(res.trace.iterations <= 5 * (35 - 5) + 5 * 6 / 2);
        prop_assert_eq!(res.beta.associated_count(), 35);
    }
}
