//! Static scenario description: base stations, user equipment, quotas and
//! the association vector that every game and baseline produces.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Radio tier of a base station. Macro cells run sub-6 GHz with a
/// non-geometric massive array, small cells run mmWave with a UPA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    Macro,
    Small,
}

/// Rows x columns of a uniform planar array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpaShape {
    pub rows: usize,
    pub cols: usize,
}

impl UpaShape {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub position: Point,
    pub tier: Tier,
    /// Antenna count `M_j`. For small cells this equals `upa.elements()`.
    pub antennas: usize,
    /// Array geometry; only meaningful for small cells.
    pub upa: UpaShape,
    pub tx_power_w: f64,
    pub carrier_hz: f64,
    pub quota: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEquipment {
    pub position: Point,
    /// mmWave array; the sub-6 GHz module is always a single antenna.
    pub mmwave_upa: UpaShape,
    /// Spatial streams `n_k` on mmWave links.
    pub streams: usize,
}

impl UserEquipment {
    pub fn mmwave_antennas(&self) -> usize {
        self.mmwave_upa.elements()
    }
}

/// One scenario realization. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub area: (f64, f64),
    pub base_stations: Vec<BaseStation>,
    pub users: Vec<UserEquipment>,
}

impl Topology {
    /// Builds and validates a topology.
    pub fn new(
        area: (f64, f64),
        base_stations: Vec<BaseStation>,
        users: Vec<UserEquipment>,
    ) -> Result<Self> {
        let topo = Self {
            area,
            base_stations,
            users,
        };
        topo.validate()?;
        Ok(topo)
    }

    fn validate(&self) -> Result<()> {
        let inside = |p: &Point| p.x >= 0.0 && p.y >= 0.0 && p.x <= self.area.0 && p.y <= self.area.1;
        for (j, bs) in self.base_stations.iter().enumerate() {
            if bs.quota == 0 {
                return Err(SimError::InvalidTopology(format!("BS {j} has zero quota")));
            }
            if bs.antennas == 0 {
                return Err(SimError::InvalidTopology(format!("BS {j} has no antennas")));
            }
            if bs.tier == Tier::Small && bs.upa.elements() != bs.antennas {
                return Err(SimError::InvalidTopology(format!(
                    "BS {j}: UPA {}x{} does not match {} antennas",
                    bs.upa.rows, bs.upa.cols, bs.antennas
                )));
            }
            if bs.tx_power_w.is_nan() || bs.tx_power_w <= 0.0 || bs.carrier_hz.is_nan() || bs.carrier_hz <= 0.0 {
                return Err(SimError::InvalidTopology(format!(
                    "BS {j} needs positive power and carrier"
                )));
            }
            if !inside(&bs.position) {
                return Err(SimError::InvalidTopology(format!("BS {j} lies outside the area")));
            }
        }
        for (k, ue) in self.users.iter().enumerate() {
            if ue.streams == 0 || ue.streams > ue.mmwave_antennas() {
                return Err(SimError::InvalidTopology(format!(
                    "UE {k}: stream count {} must be within 1..={}",
                    ue.streams,
                    ue.mmwave_antennas()
                )));
            }
            if !inside(&ue.position) {
                return Err(SimError::InvalidTopology(format!("UE {k} lies outside the area")));
            }
        }
        Ok(())
    }

    pub fn num_bs(&self) -> usize {
        self.base_stations.len()
    }

    pub fn num_ue(&self) -> usize {
        self.users.len()
    }

    pub fn quotas(&self) -> Vec<usize> {
        self.base_stations.iter().map(|b| b.quota).collect()
    }

    pub fn total_quota(&self) -> usize {
        self.base_stations.iter().map(|b| b.quota).sum()
    }

    pub fn tier(&self, j: usize) -> Tier {
        self.base_stations[j].tier
    }

    /// Streams UE `k` receives from BS `j`: one on sub-6, `n_k` on mmWave.
    pub fn streams(&self, k: usize, j: usize) -> usize {
        match self.tier(j) {
            Tier::Macro => 1,
            Tier::Small => self.users[k].streams,
        }
    }

    /// Receive antennas UE `k` uses toward BS `j`.
    pub fn rx_antennas(&self, k: usize, j: usize) -> usize {
        match self.tier(j) {
            Tier::Macro => 1,
            Tier::Small => self.users[k].mmwave_antennas(),
        }
    }
}

/// Load regime of a scenario relative to the total quota.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoadScenario {
    Underload,
    CriticalLoad,
    Overload,
}

pub fn classify_load(quotas: &[usize], ue_count: usize) -> LoadScenario {
    let total: usize = quotas.iter().sum();
    match ue_count.cmp(&total) {
        std::cmp::Ordering::Less => LoadScenario::Underload,
        std::cmp::Ordering::Equal => LoadScenario::CriticalLoad,
        std::cmp::Ordering::Greater => LoadScenario::Overload,
    }
}

/// Per-UE serving BS. `None` is the unassociated marker and is always
/// stored explicitly, one slot per UE.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssociationVector(Vec<Option<usize>>);

pub const UNASSOCIATED: Option<usize> = None;

impl AssociationVector {
    pub fn unassociated(k: usize) -> Self {
        Self(vec![UNASSOCIATED; k])
    }

    pub fn from_vec(v: Vec<Option<usize>>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<usize> {
        self.0[k]
    }

    pub fn set(&mut self, k: usize, bs: Option<usize>) {
        self.0[k] = bs;
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.0.iter().copied()
    }

    /// `K_j`, in ascending UE order.
    pub fn activation_set(&self, j: usize) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, b)| **b == Some(j))
            .map(|(k, _)| k)
            .collect()
    }

    /// Loads of BSs `0..num_bs`. Entries pointing past `num_bs` are ignored.
    pub fn loads(&self, num_bs: usize) -> Vec<usize> {
        let mut loads = vec![0; num_bs];
        for j in self.0.iter().flatten() {
            if *j < num_bs {
                loads[*j] += 1;
            }
        }
        loads
    }

    pub fn unassociated_set(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_none())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn associated_count(&self) -> usize {
        self.0.iter().filter(|b| b.is_some()).count()
    }
}

impl fmt::Display for AssociationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match b {
                Some(j) => write!(f, "{j}")?,
                None => write!(f, "-")?,
            }
        }
        write!(f, "]")
    }
}

/// First violated constraint found by [`validate_association`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// UE points at a BS index that does not exist.
    UnknownBs { ue: usize, bs: usize },
    /// Load of a BS exceeds its quota.
    QuotaExceeded { bs: usize, load: usize, quota: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownBs { ue, bs } => write!(f, "UE {ue} assigned to unknown BS {bs}"),
            Violation::QuotaExceeded { bs, load, quota } => {
                write!(f, "BS {bs} load {load} > quota {quota}")
            }
        }
    }
}

/// Checks unique association (one slot per UE, so only index range needs
/// checking) and per-BS load against the quota vector.
///
/// The outer `Result` carries dimension errors; the inner one carries the
/// first violated constraint.
pub fn validate_association(
    beta: &AssociationVector,
    quotas: &[usize],
    ue_count: usize,
) -> Result<std::result::Result<(), Violation>> {
    if beta.len() != ue_count {
        return Err(SimError::Dimension(format!(
            "association vector has {} entries, topology has {ue_count} UEs",
            beta.len()
        )));
    }
    for (k, b) in beta.iter().enumerate() {
        if let Some(j) = b {
            if j >= quotas.len() {
                return Ok(Err(Violation::UnknownBs { ue: k, bs: j }));
            }
        }
    }
    for (j, (load, quota)) in beta.loads(quotas.len()).into_iter().zip(quotas).enumerate() {
        if load > *quota {
            return Ok(Err(Violation::QuotaExceeded {
                bs: j,
                load,
                quota: *quota,
            }));
        }
    }
    Ok(Ok(()))
}

/// `activation_set` with range checking against `num_bs`.
pub fn activation_set(beta: &AssociationVector, j: usize, num_bs: usize) -> Result<Vec<usize>> {
    if j >= num_bs {
        return Err(SimError::IndexOutOfRange {
            what: "BS",
            index: j,
            len: num_bs,
        });
    }
    Ok(beta.activation_set(j))
}

/// Geometry and radio parameters for generating topology realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub area: (f64, f64),
    pub macro_positions: Vec<Point>,
    pub small_positions: Vec<Point>,
    pub macro_quota: usize,
    pub small_quota: usize,
    pub macro_antennas: usize,
    pub small_upa: UpaShape,
    pub ue_upa: UpaShape,
    pub ue_streams: usize,
    pub macro_power_w: f64,
    pub small_power_w: f64,
    pub macro_carrier_hz: f64,
    pub small_carrier_hz: f64,
}

impl LayoutParams {
    /// Quotas in BS index order: macros first, then small cells.
    pub fn quotas(&self) -> Vec<usize> {
        std::iter::repeat_n(self.macro_quota, self.macro_positions.len())
            .chain(std::iter::repeat_n(self.small_quota, self.small_positions.len()))
            .collect()
    }

    /// Draws `ue_count` users uniformly over the area (a fixed-count
    /// realization of the PPP) around the fixed BS layout.
    pub fn realize<R: Rng + ?Sized>(&self, ue_count: usize, rng: &mut R) -> Result<Topology> {
        let mut bss = Vec::with_capacity(self.macro_positions.len() + self.small_positions.len());
        for p in &self.macro_positions {
            bss.push(BaseStation {
                position: *p,
                tier: Tier::Macro,
                antennas: self.macro_antennas,
                upa: UpaShape::new(1, self.macro_antennas),
                tx_power_w: self.macro_power_w,
                carrier_hz: self.macro_carrier_hz,
                quota: self.macro_quota,
            });
        }
        for p in &self.small_positions {
            bss.push(BaseStation {
                position: *p,
                tier: Tier::Small,
                antennas: self.small_upa.elements(),
                upa: self.small_upa,
                tx_power_w: self.small_power_w,
                carrier_hz: self.small_carrier_hz,
                quota: self.small_quota,
            });
        }
        let users = (0..ue_count)
            .map(|_| UserEquipment {
                position: Point::new(
                    rng.random::<f64>() * self.area.0,
                    rng.random::<f64>() * self.area.1,
                ),
                mmwave_upa: self.ue_upa,
                streams: self.ue_streams,
            })
            .collect();
        Topology::new(self.area, bss, users)
    }
}

/// `count` points evenly spaced on a circle, starting at 45 degrees.
pub fn ring_positions(center: Point, radius: f64, count: usize) -> Vec<Point> {
    (0..count)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_4 + 2.0 * std::f64::consts::PI * i as f64 / count as f64;
            Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
        })
        .collect()
}
