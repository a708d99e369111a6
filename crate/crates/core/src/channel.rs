//! Channel realizations for every UE-BS pair.
//!
//! Sub-6 GHz links are i.i.d. Rayleigh row vectors. mmWave links follow the
//! clustered ray model
//!
//! ```text
//! H = 1/sqrt(C L) * sum_c sum_l sqrt(g_c) a_ue(phi, theta) a_bs(phi, theta)^H
//! ```
//!
//! with half-wavelength UPA responses on both ends. Large-scale gain is a
//! log-distance path loss with a distance-dependent LoS draw; it is stored
//! next to the small-scale matrix rather than folded into it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::netmodel::{Tier, Topology, UpaShape};

/// Knobs for channel generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub clusters: usize,
    pub rays: usize,
    /// Per-ray angular spread around the cluster center, in degrees.
    pub ray_spread_deg: f64,
    /// Exponential-decay LoS probability constant, in meters.
    pub los_decay_m: f64,
    /// Treat every sub-6 link as LoS instead of drawing its state.
    pub macro_always_los: bool,
    pub small_los_exponent: f64,
    pub small_nlos_exponent: f64,
    pub macro_los_exponent: f64,
    pub macro_nlos_exponent: f64,
    /// Links shorter than this use this distance for path loss.
    pub min_distance_m: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            clusters: 5,
            rays: 10,
            ray_spread_deg: 5.0,
            los_decay_m: 150.0,
            macro_always_los: false,
            small_los_exponent: 2.0,
            small_nlos_exponent: 3.2,
            macro_los_exponent: 2.0,
            macro_nlos_exponent: 3.5,
            min_distance_m: 1.0,
        }
    }
}

/// Half-wavelength UPA steering vector. Element `(m, n)` sits at index
/// `m * cols + n` and has phase `pi * (m sin(el) cos(az) + n sin(el) sin(az))`.
pub fn upa_response(azimuth: f64, elevation: f64, shape: UpaShape) -> DVector<Complex64> {
    let (se, ca, sa) = (elevation.sin(), azimuth.cos(), azimuth.sin());
    DVector::from_fn(shape.elements(), |idx, _| {
        let m = (idx / shape.cols) as f64;
        let n = (idx % shape.cols) as f64;
        Complex64::from_polar(1.0, PI * (m * se * ca + n * se * sa))
    })
}

/// Exponentially decaying cluster powers `g_c ~ exp(-c/2)`, `c = 1..=C`,
/// normalized to sum to `C`.
pub fn cluster_gains(clusters: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=clusters).map(|c| (-(c as f64) / 2.0).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|g| g * clusters as f64 / sum).collect()
}

/// Arrival/departure angles and gain phase of one ray, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayAngles {
    pub ue_azimuth: f64,
    pub ue_elevation: f64,
    pub bs_azimuth: f64,
    pub bs_elevation: f64,
    /// Initial phase of the ray's complex gain.
    pub phase: f64,
}

/// Cluster gains plus per-ray angles for one mmWave link.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub gains: Vec<f64>,
    /// `rays[c]` holds the `L` rays of cluster `c`.
    pub rays: Vec<Vec<RayAngles>>,
}

impl ClusterParams {
    pub fn clusters(&self) -> usize {
        self.gains.len()
    }

    pub fn rays_per_cluster(&self) -> usize {
        self.rays.first().map_or(0, Vec::len)
    }

    /// Cluster centers uniform over `[-pi, pi) x [-pi/2, pi/2]`, per-ray
    /// Laplacian offsets with the configured spread as standard deviation.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, params: &ChannelParams) -> Self {
        let b = params.ray_spread_deg.to_radians() / std::f64::consts::SQRT_2;
        let gains = cluster_gains(params.clusters);
        let rays = (0..params.clusters)
            .map(|_| {
                let centers = [
                    rng.random_range(-PI..PI),
                    rng.random_range(-PI / 2.0..=PI / 2.0),
                    rng.random_range(-PI..PI),
                    rng.random_range(-PI / 2.0..=PI / 2.0),
                ];
                (0..params.rays)
                    .map(|_| RayAngles {
                        ue_azimuth: centers[0] + laplace(rng, b),
                        ue_elevation: centers[1] + laplace(rng, b),
                        bs_azimuth: centers[2] + laplace(rng, b),
                        bs_elevation: centers[3] + laplace(rng, b),
                        phase: rng.random_range(0.0..2.0 * PI),
                    })
                    .collect()
            })
            .collect();
        Self { gains, rays }
    }
}

fn laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Evaluates the clustered model for fixed angles. Shape `N_k x M_j`.
pub fn mmwave_matrix(params: &ClusterParams, ue: UpaShape, bs: UpaShape) -> DMatrix<Complex64> {
    let n_paths = (params.clusters() * params.rays_per_cluster()).max(1) as f64;
    let mut h = DMatrix::<Complex64>::zeros(ue.elements(), bs.elements());
    for (gain, rays) in params.gains.iter().zip(&params.rays) {
        let amp = Complex64::new(gain.sqrt(), 0.0);
        for ray in rays {
            let a_ue = upa_response(ray.ue_azimuth, ray.ue_elevation, ue);
            let a_bs = upa_response(ray.bs_azimuth, ray.bs_elevation, bs);
            h += (a_ue * a_bs.adjoint()) * (amp * Complex64::from_polar(1.0, ray.phase));
        }
    }
    h / Complex64::new(n_paths.sqrt(), 0.0)
}

/// Draws angles and evaluates one mmWave channel matrix.
pub fn gen_mmwave_channel<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ChannelParams,
    ue: UpaShape,
    bs: UpaShape,
) -> DMatrix<Complex64> {
    mmwave_matrix(&ClusterParams::sample(rng, params), ue, bs)
}

/// `1 x M` row of i.i.d. CN(0, 1) entries.
pub fn gen_sub6_channel<R: Rng + ?Sized>(rng: &mut R, antennas: usize) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(1, antennas, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * s, im * s)
    })
}

/// LoS probability at `distance` meters.
pub fn los_probability(distance: f64, tier: Tier, params: &ChannelParams) -> f64 {
    if tier == Tier::Macro && params.macro_always_los {
        return 1.0;
    }
    (-distance / params.los_decay_m).exp()
}

/// Log-distance path loss in dB: `32.4 + 20 log10(f_GHz) + 10 n log10(d_m)`.
pub fn path_loss_db(distance: f64, carrier_hz: f64, los: bool, tier: Tier, params: &ChannelParams) -> f64 {
    let n = match (tier, los) {
        (Tier::Macro, true) => params.macro_los_exponent,
        (Tier::Macro, false) => params.macro_nlos_exponent,
        (Tier::Small, true) => params.small_los_exponent,
        (Tier::Small, false) => params.small_nlos_exponent,
    };
    32.4 + 20.0 * (carrier_hz / 1e9).log10() + 10.0 * n * distance.log10()
}

/// Draws the LoS state and returns `(linear gain, los)`.
pub fn large_scale_gain<R: Rng + ?Sized>(
    rng: &mut R,
    distance: f64,
    carrier_hz: f64,
    tier: Tier,
    params: &ChannelParams,
) -> (f64, bool) {
    let d = distance.max(params.min_distance_m);
    let los = rng.random::<f64>() < los_probability(d, tier, params);
    let pl = path_loss_db(d, carrier_hz, los, tier, params);
    (10f64.powf(-pl / 10.0), los)
}

/// Small-scale matrix plus large-scale gain of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N_k x M_j` on mmWave, `1 x M_j` on sub-6.
    pub matrix: DMatrix<Complex64>,
    pub large_scale_gain: f64,
    pub los: bool,
}

impl ChannelRealization {
    /// `sqrt(gain) * H`, the channel the receiver actually sees.
    pub fn scaled(&self) -> DMatrix<Complex64> {
        &self.matrix * Complex64::new(self.large_scale_gain.sqrt(), 0.0)
    }

    pub fn scaled_norm(&self) -> f64 {
        self.matrix.norm() * self.large_scale_gain.sqrt()
    }
}

/// All `K x J` links of a topology, indexed `[k][j]`.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    num_bs: usize,
    links: Vec<ChannelRealization>,
}

impl ChannelSet {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, topo: &Topology, params: &ChannelParams) -> Self {
        let mut links = Vec::with_capacity(topo.num_ue() * topo.num_bs());
        for ue in &topo.users {
            for bs in &topo.base_stations {
                let d = ue.position.distance(&bs.position);
                let (gain, los) = large_scale_gain(rng, d, bs.carrier_hz, bs.tier, params);
                let matrix = match bs.tier {
                    Tier::Macro => gen_sub6_channel(rng, bs.antennas),
                    Tier::Small => gen_mmwave_channel(rng, params, ue.mmwave_upa, bs.upa),
                };
                links.push(ChannelRealization {
                    matrix,
                    large_scale_gain: gain,
                    los,
                });
            }
        }
        Self {
            num_bs: topo.num_bs(),
            links,
        }
    }

    /// Builds a set from explicit links, row-major over `(k, j)`.
    pub fn from_links(num_bs: usize, links: Vec<ChannelRealization>) -> Self {
        assert!(num_bs > 0 && links.len().is_multiple_of(num_bs), "links must fill a K x J grid");
        Self { num_bs, links }
    }

    pub fn get(&self, k: usize, j: usize) -> &ChannelRealization {
        &self.links[k * self.num_bs + j]
    }

    pub fn num_bs(&self) -> usize {
        self.num_bs
    }

    pub fn num_ue(&self) -> usize {
        self.links.len() / self.num_bs
    }
}
