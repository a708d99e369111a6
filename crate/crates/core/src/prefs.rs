//! Preference lists for both sides of the market.
//!
//! Every builder reduces to a `K x J` table of preference values that both
//! sides share; [`PreferenceLists::from_values`] turns it into sorted lists.
//! Ordering is by value descending, ties by ascending index. Pairs without
//! a value are left out of both the UE's and the BS's list.

use serde::{Deserialize, Serialize};

use crate::beamrate::{lin_to_db, RateContext};
use crate::channel::ChannelSet;
use crate::error::Result;
use crate::netmodel::AssociationVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranked {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceLists {
    /// Per UE, BSs in descending preference.
    pub ue_lists: Vec<Vec<Ranked>>,
    /// Per BS, UEs in descending preference.
    pub bs_lists: Vec<Vec<Ranked>>,
}

fn sort_desc(list: &mut [Ranked]) {
    list.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.index.cmp(&b.index)));
}

impl PreferenceLists {
    /// Lists from a shared value table `values[k][j]`. `None` and NaN
    /// entries drop the pair from both sides.
    pub fn from_values(values: &[Vec<Option<f64>>], num_bs: usize) -> Self {
        let mut ue_lists = Vec::with_capacity(values.len());
        let mut bs_lists = vec![Vec::new(); num_bs];
        for (k, row) in values.iter().enumerate() {
            let mut list = Vec::with_capacity(num_bs);
            for (j, v) in row.iter().enumerate() {
                if let Some(value) = v.filter(|v| !v.is_nan()) {
                    list.push(Ranked { index: j, value });
                    bs_lists[j].push(Ranked { index: k, value });
                }
            }
            sort_desc(&mut list);
            ue_lists.push(list);
        }
        for list in &mut bs_lists {
            sort_desc(list);
        }
        Self { ue_lists, bs_lists }
    }

    /// Lists from explicit orders, most preferred first. Values are
    /// synthetic ranks so that `value` order matches list order.
    pub fn from_orders(ue_orders: Vec<Vec<usize>>, bs_orders: Vec<Vec<usize>>) -> Self {
        let ranked = |order: Vec<usize>| {
            let n = order.len();
            order
                .into_iter()
                .enumerate()
                .map(|(pos, index)| Ranked {
                    index,
                    value: (n - pos) as f64,
                })
                .collect()
        };
        Self {
            ue_lists: ue_orders.into_iter().map(ranked).collect(),
            bs_lists: bs_orders.into_iter().map(ranked).collect(),
        }
    }

    pub fn num_ue(&self) -> usize {
        self.ue_lists.len()
    }

    pub fn num_bs(&self) -> usize {
        self.bs_lists.len()
    }

    pub fn ue_order(&self, k: usize) -> Vec<usize> {
        self.ue_lists[k].iter().map(|r| r.index).collect()
    }

    pub fn bs_order(&self, j: usize) -> Vec<usize> {
        self.bs_lists[j].iter().map(|r| r.index).collect()
    }

    /// `rank[j][k]`: position of UE `k` in BS `j`'s list.
    pub fn bs_ranks(&self) -> Vec<Vec<Option<usize>>> {
        let k = self.num_ue();
        self.bs_lists
            .iter()
            .map(|list| {
                let mut r = vec![None; k];
                for (pos, e) in list.iter().enumerate() {
                    if e.index < k {
                        r[e.index] = Some(pos);
                    }
                }
                r
            })
            .collect()
    }

    /// `rank[k][j]`: position of BS `j` in UE `k`'s list.
    pub fn ue_ranks(&self) -> Vec<Vec<Option<usize>>> {
        let j = self.num_bs();
        self.ue_lists
            .iter()
            .map(|list| {
                let mut r = vec![None; j];
                for (pos, e) in list.iter().enumerate() {
                    if e.index < j {
                        r[e.index] = Some(pos);
                    }
                }
                r
            })
            .collect()
    }

    /// True when every UE lists all BSs.
    pub fn ue_lists_full(&self) -> bool {
        let j = self.num_bs();
        self.ue_lists.iter().all(|l| l.len() == j)
    }
}

/// Which measurement feeds the preference values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrefBuilder {
    Rate,
    Norm,
    Cqi,
}

impl std::str::FromStr for PrefBuilder {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rate" => Ok(Self::Rate),
            "norm" => Ok(Self::Norm),
            "cqi" => Ok(Self::Cqi),
            other => Err(format!("unknown preference builder `{other}` (rate | norm | cqi)")),
        }
    }
}

/// Which pairs are in range. `None` means every pair is.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeMask(Option<Vec<Vec<bool>>>);

impl RangeMask {
    pub fn all() -> Self {
        Self(None)
    }

    /// Pairs whose SINR (linear) is below `floor_db` are out of range.
    pub fn from_sinr(sinr: &[Vec<f64>], floor_db: Option<f64>) -> Self {
        match floor_db {
            None => Self(None),
            Some(floor) => Self(Some(
                sinr.iter()
                    .map(|row| row.iter().map(|s| lin_to_db(*s) >= floor).collect())
                    .collect(),
            )),
        }
    }

    pub fn contains(&self, k: usize, j: usize) -> bool {
        self.0.as_ref().is_none_or(|m| m[k][j])
    }

    fn apply(&self, values: Vec<Vec<f64>>) -> Vec<Vec<Option<f64>>> {
        values
            .into_iter()
            .enumerate()
            .map(|(k, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, v)| self.contains(k, j).then_some(v))
                    .collect()
            })
            .collect()
    }
}

/// Preference value = instantaneous rate with all other UEs fixed at `beta0`.
pub fn build_by_rate(ctx: &RateContext, beta0: &AssociationVector, mask: &RangeMask) -> Result<PreferenceLists> {
    let table = ctx.rate_table(beta0)?;
    Ok(PreferenceLists::from_values(&mask.apply(table.rates), ctx.num_bs()))
}

/// Preference value = Frobenius norm of the large-scale-weighted channel.
pub fn build_by_channel_norm(channels: &ChannelSet, mask: &RangeMask) -> PreferenceLists {
    let values = (0..channels.num_ue())
        .map(|k| (0..channels.num_bs()).map(|j| channels.get(k, j).scaled_norm()).collect())
        .collect();
    PreferenceLists::from_values(&mask.apply(values), channels.num_bs())
}

/// Uniform SINR-to-CQI quantizer clamped to `1..=levels`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CqiQuantizer {
    pub min_db: f64,
    pub step_db: f64,
    pub levels: u8,
}

impl Default for CqiQuantizer {
    fn default() -> Self {
        Self {
            min_db: -6.0,
            step_db: 2.0,
            levels: 15,
        }
    }
}

impl CqiQuantizer {
    pub fn cqi_db(&self, sinr_db: f64) -> u8 {
        let idx = ((sinr_db - self.min_db) / self.step_db).floor() + 1.0;
        idx.clamp(1.0, self.levels as f64) as u8
    }

    pub fn cqi(&self, sinr_lin: f64) -> u8 {
        if sinr_lin <= 0.0 {
            return 1;
        }
        self.cqi_db(lin_to_db(sinr_lin))
    }
}

/// Preference value = CQI of the pair's SINR.
pub fn build_by_cqi(sinr: &[Vec<f64>], quantizer: &CqiQuantizer, mask: &RangeMask, num_bs: usize) -> PreferenceLists {
    let values = sinr
        .iter()
        .map(|row| row.iter().map(|s| quantizer.cqi(*s) as f64).collect())
        .collect();
    PreferenceLists::from_values(&mask.apply(values), num_bs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(v: &[&[f64]]) -> Vec<Vec<Option<f64>>> {
        v.iter().map(|r| r.iter().map(|x| Some(*x)).collect()).collect()
    }

    #[test]
    fn metric_table_reproduces_rankings() {
        // UEs alpha, beta; BSs A, B.
        let p = PreferenceLists::from_values(&table(&[&[4.0, 3.0], &[3.0, 1.0]]), 2);
        assert_eq!(p.ue_order(0), vec![0, 1]);
        assert_eq!(p.ue_order(1), vec![0, 1]);
        assert_eq!(p.bs_order(0), vec![0, 1]);
        assert_eq!(p.bs_order(1), vec![0, 1]);
    }

    #[test]
    fn single_bs_lists() {
        let p = PreferenceLists::from_values(&table(&[&[1.0], &[2.0], &[0.5]]), 1);
        for k in 0..3 {
            assert_eq!(p.ue_order(k), vec![0]);
        }
        assert_eq!(p.bs_order(0), vec![1, 0, 2]);
    }

    #[test]
    fn ties_break_by_index() {
        let p = PreferenceLists::from_values(&table(&[&[1.0, 1.0, 1.0, 1.0]]), 4);
        assert_eq!(p.ue_order(0), vec![0, 1, 2, 3]);
    }

    #[test]
    fn norms_sort_and_zero_is_last() {
        let p = PreferenceLists::from_values(&table(&[&[3.0, 5.0, 0.0]]), 3);
        assert_eq!(p.ue_order(0), vec![1, 0, 2]);
    }

    #[test]
    fn omitted_pairs_vanish_from_both_sides() {
        let v = vec![vec![Some(1.0), None], vec![Some(2.0), Some(3.0)]];
        let p = PreferenceLists::from_values(&v, 2);
        assert_eq!(p.ue_order(0), vec![0]);
        assert_eq!(p.bs_order(1), vec![1]);
        assert!(!p.ue_lists_full());
    }

    #[test]
    fn cqi_quantizer() {
        let q = CqiQuantizer::default();
        assert_eq!(q.cqi_db(-10.0), 1);
        assert_eq!(q.cqi_db(30.0), 15);
        assert_eq!(q.cqi_db(0.0), 4);
        assert_eq!(q.cqi_db(-6.0), 1);
        assert_eq!(q.cqi_db(-4.0), 2);
        assert_eq!(q.cqi(0.0), 1);
        assert_eq!(q.cqi(1.0), 4);
    }

    #[test]
    fn cqi_is_monotone_in_sinr() {
        let q = CqiQuantizer::default();
        let mut prev = 0;
        for i in -200..400 {
            let c = q.cqi_db(i as f64 * 0.1);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn range_mask_drops_weak_pairs() {
        let sinr = vec![vec![0.05, 10.0]];
        let m = RangeMask::from_sinr(&sinr, Some(-10.0));
        assert!(!m.contains(0, 0));
        assert!(m.contains(0, 1));
        assert!(RangeMask::from_sinr(&sinr, None).contains(0, 0));
    }

    fn value_table() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..6, 1usize..8).prop_flat_map(|(j, k)| {
            proptest::collection::vec(proptest::collection::vec(-5i32..5, j), k)
                .prop_map(|t| t.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect())
        })
    }

    proptest! {
        #[test]
        fn lists_are_argsort_of_values(t in value_table()) {
            let j = t[0].len();
            let p = PreferenceLists::from_values(&t.iter().map(|r| r.iter().map(|x| Some(*x)).collect()).collect::<Vec<_>>(), j);
            for (k, row) in t.iter().enumerate() {
                let order = p.ue_order(k);
                prop_assert_eq!(order.len(), j);
                for w in order.windows(2) {
                    let (a, b) = (row[w[0]], row[w[1]]);
                    prop_assert!(a > b || (a == b && w[0] < w[1]));
                }
            }
            for jj in 0..j {
                let order = p.bs_order(jj);
                prop_assert_eq!(order.len(), t.len());
                for w in order.windows(2) {
                    let (a, b) = (t[w[0]][jj], t[w[1]][jj]);
                    prop_assert!(a > b || (a == b && w[0] < w[1]));
                }
            }
        }

        #[test]
        fn monotone_transform_keeps_order(t in value_table()) {
            let j = t[0].len();
            let wrap = |f: &dyn Fn(f64) -> f64| t.iter().map(|r| r.iter().map(|x| Some(f(*x))).collect()).collect::<Vec<_>>();
            let a = PreferenceLists::from_values(&wrap(&|x| x), j);
            let b = PreferenceLists::from_values(&wrap(&|x| (x * 0.3).exp() + 7.0), j);
            for k in 0..t.len() {
                prop_assert_eq!(a.ue_order(k), b.ue_order(k));
            }
            for jj in 0..j {
                prop_assert_eq!(a.bs_order(jj), b.bs_order(jj));
            }
        }
    }
}
