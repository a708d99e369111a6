//! Beamforming, association-dependent interference and per-link rates.
//!
//! A [`RateContext`] owns one trial's topology, channels and beamformers and
//! precomputes the Gram matrices `E E^H` of every same-tier effective
//! channel `E = W_{k,s}^H sqrt(g) H_{k,i} F_{l,i}`. Evaluating a rate under a
//! given association then only sums those Grams over activation sets.
//!
//! UE `k`'s combiner depends on the BS `s` it is (hypothetically) served
//! by, so effective channels are indexed by `(k, s, l, i)`.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Result, SimError};
use crate::netmodel::{AssociationVector, Tier, Topology};

/// Thermal noise configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    pub psd_dbm_per_hz: f64,
    pub noise_figure_db: f64,
    pub macro_bandwidth_hz: f64,
    pub small_bandwidth_hz: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            psd_dbm_per_hz: -174.0,
            noise_figure_db: 10.0,
            macro_bandwidth_hz: 20e6,
            small_bandwidth_hz: 100e6,
        }
    }
}

impl NoiseParams {
    /// Noise power `N0` in watts for a tier.
    pub fn power_w(&self, tier: Tier) -> f64 {
        let bw = match tier {
            Tier::Macro => self.macro_bandwidth_hz,
            Tier::Small => self.small_bandwidth_hz,
        };
        dbm_to_w(self.psd_dbm_per_hz + 10.0 * bw.log10() + self.noise_figure_db)
    }
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Precoders `F_{k,j}` (`M_j x n`) and combiners `W_{k,j}` (`rx x n`) for
/// every UE-BS pair. Sub-6 combiners are the scalar 1.
#[derive(Debug, Clone)]
pub struct BeamformerSet {
    num_bs: usize,
    precoders: Vec<DMatrix<Complex64>>,
    combiners: Vec<DMatrix<Complex64>>,
}

impl BeamformerSet {
    pub fn precoder(&self, k: usize, j: usize) -> &DMatrix<Complex64> {
        &self.precoders[k * self.num_bs + j]
    }

    pub fn combiner(&self, k: usize, j: usize) -> &DMatrix<Complex64> {
        &self.combiners[k * self.num_bs + j]
    }
}

fn basis(rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |r, c| {
        if r == c {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Dominant-singular-subspace beamformers on mmWave, matched filter on sub-6.
/// Zero channels fall back to the leading standard basis vectors.
pub fn compute_beamformers(topo: &Topology, channels: &ChannelSet) -> BeamformerSet {
    let (kk, jj) = (topo.num_ue(), topo.num_bs());
    let mut precoders = Vec::with_capacity(kk * jj);
    let mut combiners = Vec::with_capacity(kk * jj);
    for k in 0..kk {
        for j in 0..jj {
            let h = &channels.get(k, j).matrix;
            let n = topo.streams(k, j);
            let (f, w) = match topo.tier(j) {
                Tier::Macro => {
                    let norm = h.norm();
                    let f = if norm > 0.0 {
                        h.adjoint() / Complex64::new(norm, 0.0)
                    } else {
                        basis(h.ncols(), 1)
                    };
                    (f, basis(1, 1))
                }
                Tier::Small => dominant_subspace(h, n),
            };
            precoders.push(f);
            combiners.push(w);
        }
    }
    BeamformerSet {
        num_bs: jj,
        precoders,
        combiners,
    }
}

/// `(F, W)` = top-`n` right and left singular vectors of `h`.
fn dominant_subspace(h: &DMatrix<Complex64>, n: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let (rows, cols) = h.shape();
    if h.norm() == 0.0 {
        return (basis(cols, n), basis(rows, n));
    }
    let svd = h.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let mut f = DMatrix::zeros(cols, n);
    let mut w = DMatrix::zeros(rows, n);
    for (s, &idx) in order.iter().take(n).enumerate() {
        f.set_column(s, &v_t.row(idx).adjoint());
        w.set_column(s, &u.column(idx));
    }
    (f, w)
}

/// `W_{k,rx}^H sqrt(g) H_{k,j} F_{l,j}`, shape `n_k x n_l`. `rx` is the BS
/// UE `k`'s combiner points at and must share `j`'s tier.
pub fn effective_channel(
    topo: &Topology,
    channels: &ChannelSet,
    beams: &BeamformerSet,
    k: usize,
    l: usize,
    j: usize,
    rx: usize,
) -> Result<DMatrix<Complex64>> {
    check_index("UE", k, topo.num_ue())?;
    check_index("UE", l, topo.num_ue())?;
    check_index("BS", j, topo.num_bs())?;
    check_index("BS", rx, topo.num_bs())?;
    if topo.tier(rx) != topo.tier(j) {
        return Err(SimError::TierMismatch {
            ue: k,
            rx_bs: rx,
            tx_bs: j,
        });
    }
    Ok(beams.combiner(k, rx).adjoint() * channels.get(k, j).scaled() * beams.precoder(l, j))
}

fn check_index(what: &'static str, index: usize, len: usize) -> Result<()> {
    if index >= len {
        Err(SimError::IndexOutOfRange { what, index, len })
    } else {
        Ok(())
    }
}

/// Rates and SINRs of every pair under one association, with the
/// hypothetical-switch convention for pairs off the association.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// `rates[k][j]` in bps/Hz.
    pub rates: Vec<Vec<f64>>,
    /// `sinr[k][j]`, linear.
    pub sinr: Vec<Vec<f64>>,
}

/// Everything needed to evaluate rates for one trial.
#[derive(Debug, Clone)]
pub struct RateContext {
    topo: Topology,
    channels: ChannelSet,
    beams: BeamformerSet,
    noise_w: Vec<f64>,
    gram_offset: Vec<usize>,
    grams: Vec<Complex64>,
}

const NO_GRAM: usize = usize::MAX;

impl RateContext {
    pub fn new(topo: Topology, channels: ChannelSet, noise: &NoiseParams) -> Result<Self> {
        if channels.num_ue() != topo.num_ue() || channels.num_bs() != topo.num_bs() {
            return Err(SimError::Dimension(format!(
                "channel set is {}x{}, topology is {}x{}",
                channels.num_ue(),
                channels.num_bs(),
                topo.num_ue(),
                topo.num_bs()
            )));
        }
        let beams = compute_beamformers(&topo, &channels);
        let noise_w = topo.base_stations.iter().map(|b| noise.power_w(b.tier)).collect();
        Ok(Self::with_parts(topo, channels, beams, noise_w))
    }

    /// Builds a context from explicit beamformers and per-BS noise powers.
    pub fn with_parts(topo: Topology, channels: ChannelSet, beams: BeamformerSet, noise_w: Vec<f64>) -> Self {
        let (kk, jj) = (topo.num_ue(), topo.num_bs());
        let mut gram_offset = vec![NO_GRAM; kk * jj * kk * jj];
        let mut grams = Vec::new();
        for k in 0..kk {
            for rx in 0..jj {
                let nk = topo.streams(k, rx);
                let w_h = beams.combiner(k, rx).adjoint();
                for i in (0..jj).filter(|&i| topo.tier(i) == topo.tier(rx)) {
                    let a = &w_h * channels.get(k, i).scaled();
                    for l in 0..kk {
                        let e = &a * beams.precoder(l, i);
                        let g = &e * e.adjoint();
                        debug_assert_eq!(g.shape(), (nk, nk));
                        gram_offset[((k * jj + rx) * kk + l) * jj + i] = grams.len();
                        grams.extend(g.iter().copied());
                    }
                }
            }
        }
        Self {
            topo,
            channels,
            beams,
            noise_w,
            gram_offset,
            grams,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn beams(&self) -> &BeamformerSet {
        &self.beams
    }

    pub fn noise_w(&self, j: usize) -> f64 {
        self.noise_w[j]
    }

    pub fn num_ue(&self) -> usize {
        self.topo.num_ue()
    }

    pub fn num_bs(&self) -> usize {
        self.topo.num_bs()
    }

    /// Column-major `n_k x n_k` Gram of the `(k, rx, l, i)` effective channel.
    fn gram(&self, k: usize, rx: usize, l: usize, i: usize) -> &[Complex64] {
        let (kk, jj) = (self.num_ue(), self.num_bs());
        let off = self.gram_offset[((k * jj + rx) * kk + l) * jj + i];
        debug_assert_ne!(off, NO_GRAM, "cross-tier gram requested");
        let n = self.topo.streams(k, rx);
        &self.grams[off..off + n * n]
    }

    /// Signal Gram and interference-plus-noise covariance of UE `k` under
    /// `beta`, where `beta[k]` must be set.
    fn signal_and_covariance(
        &self,
        k: usize,
        beta: &AssociationVector,
        loads: &[usize],
    ) -> (usize, DMatrix<Complex64>, DMatrix<Complex64>) {
        let s = beta.get(k).expect("UE must be associated");
        let n = self.topo.streams(k, s);
        let tier = self.topo.tier(s);
        let power = |i: usize| self.topo.base_stations[i].tx_power_w / loads[i] as f64;
        let mut v = DMatrix::<Complex64>::identity(n, n) * Complex64::new(self.noise_w[s], 0.0);
        for (l, b) in beta.iter().enumerate() {
            let Some(i) = b else { continue };
            if l == k || self.topo.tier(i) != tier {
                continue;
            }
            let p = Complex64::new(power(i), 0.0);
            for (dst, src) in v.iter_mut().zip(self.gram(k, s, l, i)) {
                *dst += p * src;
            }
        }
        let signal = DMatrix::from_column_slice(n, n, self.gram(k, s, k, s)) * Complex64::new(power(s), 0.0);
        (s, signal, v)
    }

    /// `R_{k, beta_k}(beta)` for an associated UE, 0 for an unassociated one.
    pub fn rate_under(&self, k: usize, beta: &AssociationVector) -> Result<f64> {
        if beta.get(k).is_none() {
            return Ok(0.0);
        }
        let loads = beta.loads(self.num_bs());
        self.rate_with_loads(k, beta, &loads)
    }

    fn rate_with_loads(&self, k: usize, beta: &AssociationVector, loads: &[usize]) -> Result<f64> {
        let (s, signal, v) = self.signal_and_covariance(k, beta, loads);
        if signal.nrows() == 1 {
            let noise = v[(0, 0)].re;
            if noise.is_nan() || noise <= 0.0 {
                return Err(SimError::SingularCovariance { ue: k, bs: s });
            }
            return Ok((1.0 + signal[(0, 0)].re / noise).log2());
        }
        let ld_v = log2_det_hpd(v.clone()).ok_or(SimError::SingularCovariance { ue: k, bs: s })?;
        let ld_total = log2_det_hpd(v + signal).ok_or(SimError::SingularCovariance { ue: k, bs: s })?;
        Ok((ld_total - ld_v).max(0.0))
    }

    /// Scalar SINR `P ||E||_F^2 / tr(V)` of UE `k` under `beta`.
    pub fn sinr_under(&self, k: usize, beta: &AssociationVector) -> f64 {
        if beta.get(k).is_none() {
            return 0.0;
        }
        let loads = beta.loads(self.num_bs());
        let (_, signal, v) = self.signal_and_covariance(k, beta, &loads);
        let tr = |m: &DMatrix<Complex64>| m.diagonal().iter().map(|x| x.re).sum::<f64>();
        tr(&signal) / tr(&v)
    }

    /// Sum-rate utility `U(r(beta))`.
    pub fn utility(&self, beta: &AssociationVector) -> Result<f64> {
        self.rates_under(beta).map(|r| r.iter().sum())
    }

    /// Per-UE rate under `beta`; 0 for unassociated UEs.
    pub fn rates_under(&self, beta: &AssociationVector) -> Result<Vec<f64>> {
        let loads = beta.loads(self.num_bs());
        (0..beta.len())
            .map(|k| match beta.get(k) {
                Some(_) => self.rate_with_loads(k, beta, &loads),
                None => Ok(0.0),
            })
            .collect()
    }

    /// Lowest-rate member of each BS's activation set, used as the UE to
    /// switch out when a full BS is evaluated hypothetically. Ties go to
    /// the lower UE index.
    pub fn weakest_members(&self, beta: &AssociationVector) -> Result<Vec<Option<usize>>> {
        let rates = self.rates_under(beta)?;
        let mut weakest: Vec<Option<usize>> = vec![None; self.num_bs()];
        for (k, b) in beta.iter().enumerate() {
            let Some(j) = b else { continue };
            match weakest[j] {
                Some(w) if rates[w] <= rates[k] => {}
                _ => weakest[j] = Some(k),
            }
        }
        Ok(weakest)
    }

    /// `beta` with UE `k` moved to BS `j`. If `j` is at quota, its weakest
    /// member takes `k`'s old slot.
    pub fn hypothetical(
        &self,
        k: usize,
        j: usize,
        beta: &AssociationVector,
        weakest: &[Option<usize>],
    ) -> AssociationVector {
        let mut out = beta.clone();
        let old = beta.get(k);
        if old == Some(j) {
            return out;
        }
        out.set(k, Some(j));
        let load = beta.iter().filter(|b| *b == Some(j)).count();
        if load >= self.topo.base_stations[j].quota {
            if let Some(w) = weakest[j] {
                out.set(w, old);
            }
        }
        out
    }

    /// `R_{k,j}(beta)`: the actual rate when `beta_k = j`, otherwise the
    /// rate after hypothetically switching `k` to `j`.
    pub fn instantaneous_rate(&self, k: usize, j: usize, beta: &AssociationVector) -> Result<f64> {
        self.check(k, j, beta)?;
        if beta.get(k) == Some(j) {
            return self.rate_under(k, beta);
        }
        let weakest = self.weakest_members(beta)?;
        self.rate_under(k, &self.hypothetical(k, j, beta, &weakest))
    }

    /// Scalar received SINR of pair `(k, j)` with the same switch convention.
    pub fn received_sinr(&self, k: usize, j: usize, beta: &AssociationVector) -> Result<f64> {
        self.check(k, j, beta)?;
        if beta.get(k) == Some(j) {
            return Ok(self.sinr_under(k, beta));
        }
        let weakest = self.weakest_members(beta)?;
        Ok(self.sinr_under(k, &self.hypothetical(k, j, beta, &weakest)))
    }

    fn check(&self, k: usize, j: usize, beta: &AssociationVector) -> Result<()> {
        if beta.len() != self.num_ue() {
            return Err(SimError::Dimension(format!(
                "association vector has {} entries, expected {}",
                beta.len(),
                self.num_ue()
            )));
        }
        check_index("UE", k, self.num_ue())?;
        check_index("BS", j, self.num_bs())
    }

    /// Full `K x J` table of rates and SINRs under `beta`.
    pub fn rate_table(&self, beta: &AssociationVector) -> Result<RateTable> {
        let weakest = self.weakest_members(beta)?;
        let (kk, jj) = (self.num_ue(), self.num_bs());
        let mut rates = vec![vec![0.0; jj]; kk];
        let mut sinr = vec![vec![0.0; jj]; kk];
        for k in 0..kk {
            for j in 0..jj {
                let hyp = self.hypothetical(k, j, beta, &weakest);
                rates[k][j] = self.rate_under(k, &hyp)?;
                sinr[k][j] = self.sinr_under(k, &hyp);
            }
        }
        Ok(RateTable { rates, sinr })
    }

    /// Interference-free SINR table: every pair evaluated with UE `k` alone
    /// in the network at BS `j`.
    pub fn isolated_sinr_table(&self) -> Vec<Vec<f64>> {
        let kk = self.num_ue();
        (0..kk)
            .map(|k| {
                (0..self.num_bs())
                    .map(|j| {
                        let mut b = AssociationVector::unassociated(kk);
                        b.set(k, Some(j));
                        self.sinr_under(k, &b)
                    })
                    .collect()
            })
            .collect()
    }
}

/// `log2 det` of a Hermitian positive-definite matrix, `None` if not PD.
fn log2_det_hpd(m: DMatrix<Complex64>) -> Option<f64> {
    let chol: Cholesky<Complex64, Dyn> = Cholesky::new(m)?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)].re;
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        acc += 2.0 * d.log2();
    }
    Some(acc)
}
