//! Downlink user association in a two-tier network: a sub-6 GHz macro cell
//! overlaid with mmWave small cells.
//!
//! The crate covers the radio model (clustered mmWave channels, SVD and
//! matched-filter beamforming, rate evaluation), preference construction,
//! the matching games (deferred acceptance and the early-acceptance
//! variants), repeated games, baseline schemes, metrics, and a
//! Monte-Carlo runner.

pub mod baselines;
pub mod beamrate;
pub mod channel;
pub mod error;
pub mod games;
pub mod metrics;
pub mod multigame;
pub mod netmodel;
pub mod prefs;
pub mod runner;

pub use beamrate::{BeamformerSet, NoiseParams, RateContext, RateTable};
pub use channel::{ChannelParams, ChannelRealization, ChannelSet};
pub use error::{Result, SimError};
pub use games::{is_stable, play, GameInput, GameKind, GameResult, GameTrace, Message, Stability};
pub use metrics::{Aggregate, Summary, TrialMetrics};
pub use multigame::{run_multigame, MultiGameConfig, MultiGameOutcome, TrackerState};
pub use netmodel::{
    AssociationVector, BaseStation, LayoutParams, LoadScenario, Point, Tier, Topology, UpaShape, UserEquipment,
    Violation, UNASSOCIATED,
};
pub use prefs::{PrefBuilder, PreferenceLists, RangeMask};
pub use runner::{ExperimentConfig, Scheme, SweepAxis};
