//! Config-driven Monte-Carlo harness.
//!
//! Trial `t` uses seed `base_seed + t` for its topology and channels; every
//! selected scheme runs on that same realization. Trials run in parallel
//! but results are always written in trial order.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{centralized_swap, max_sinr_association, random_association};
use crate::beamrate::{dbm_to_w, NoiseParams, RateContext};
use crate::channel::{ChannelParams, ChannelSet};
use crate::error::{Result, SimError};
use crate::games::{play, GameInput, GameKind, GameTrace};
use crate::metrics::{aggregate, percentile, TrialMetrics};
use crate::multigame::{run_multigame, MultiGameConfig};
use crate::netmodel::{ring_positions, AssociationVector, LayoutParams, Point, UpaShape};
use crate::prefs::{build_by_channel_norm, build_by_cqi, build_by_rate, CqiQuantizer, PrefBuilder, PreferenceLists, RangeMask};

/// One association scheme the runner can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scheme {
    Game(GameKind),
    Multi(GameKind),
    MaxSinr,
    Random,
    Swap,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Game(g) => write!(f, "{g}"),
            Scheme::Multi(g) => write!(f, "multi-{g}"),
            Scheme::MaxSinr => f.write_str("max-sinr"),
            Scheme::Random => f.write_str("random"),
            Scheme::Swap => f.write_str("swap"),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "max-sinr" => Ok(Scheme::MaxSinr),
            "random" => Ok(Scheme::Random),
            "swap" => Ok(Scheme::Swap),
            _ => match s.strip_prefix("multi-") {
                Some(inner) => inner.parse().map(Scheme::Multi),
                None => s.parse().map(Scheme::Game),
            }
            .map_err(|_| {
                format!(
                    "unknown scheme `{s}` (da | ea-base | ea-plu | ea-plu-ra | multi-<game> | max-sinr | random | swap)"
                )
            }),
        }
    }
}

impl TryFrom<String> for Scheme {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.to_string()
    }
}

/// Parses a comma-separated scheme list.
pub fn parse_schemes(list: &str) -> std::result::Result<Vec<Scheme>, String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub area_m: [f64; 2],
    pub macro_count: usize,
    pub small_count: usize,
    pub ue_count: usize,
    /// When set, `ue_count` becomes `round(load_factor * total quota)`.
    pub load_factor: Option<f64>,
    pub macro_quota: usize,
    pub small_quota: usize,
    pub macro_antennas: usize,
    pub small_upa: [usize; 2],
    pub ue_upa: [usize; 2],
    pub ue_streams: usize,
    pub macro_power_dbm: f64,
    pub small_power_dbm: f64,
    pub macro_carrier_ghz: f64,
    pub small_carrier_ghz: f64,
    pub small_ring_radius_m: f64,
    pub macro_positions: Option<Vec<[f64; 2]>>,
    pub small_positions: Option<Vec<[f64; 2]>>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            area_m: [500.0, 500.0],
            macro_count: 1,
            small_count: 4,
            ue_count: 35,
            load_factor: None,
            macro_quota: 15,
            small_quota: 5,
            macro_antennas: 64,
            small_upa: [8, 8],
            ue_upa: [2, 2],
            ue_streams: 1,
            macro_power_dbm: 40.0,
            small_power_dbm: 30.0,
            macro_carrier_ghz: 1.8,
            small_carrier_ghz: 28.0,
            small_ring_radius_m: 150.0,
            macro_positions: None,
            small_positions: None,
        }
    }
}

impl TopologyConfig {
    pub fn num_bs(&self) -> usize {
        self.macro_count + self.small_count
    }

    pub fn total_quota(&self) -> usize {
        self.macro_count * self.macro_quota + self.small_count * self.small_quota
    }

    pub fn effective_ue_count(&self) -> usize {
        match self.load_factor {
            Some(f) => (f * self.total_quota() as f64).round() as usize,
            None => self.ue_count,
        }
    }

    pub fn layout(&self) -> Result<LayoutParams> {
        let center = Point::new(self.area_m[0] / 2.0, self.area_m[1] / 2.0);
        let explicit = |v: &Option<Vec<[f64; 2]>>, count: usize, what: &str| -> Result<Option<Vec<Point>>> {
            match v {
                None => Ok(None),
                Some(list) if list.len() == count => Ok(Some(list.iter().map(|p| Point::new(p[0], p[1])).collect())),
                Some(list) => Err(SimError::Config(format!(
                    "{what}_positions lists {} points but {what}_count is {count}",
                    list.len()
                ))),
            }
        };
        let macro_positions = explicit(&self.macro_positions, self.macro_count, "macro")?.unwrap_or_else(|| {
            if self.macro_count == 1 {
                vec![center]
            } else {
                ring_positions(center, self.area_m[0].min(self.area_m[1]) / 4.0, self.macro_count)
            }
        });
        let small_positions = explicit(&self.small_positions, self.small_count, "small")?
            .unwrap_or_else(|| ring_positions(center, self.small_ring_radius_m, self.small_count));
        Ok(LayoutParams {
            area: (self.area_m[0], self.area_m[1]),
            macro_positions,
            small_positions,
            macro_quota: self.macro_quota,
            small_quota: self.small_quota,
            macro_antennas: self.macro_antennas,
            small_upa: UpaShape::new(self.small_upa[0], self.small_upa[1]),
            ue_upa: UpaShape::new(self.ue_upa[0], self.ue_upa[1]),
            ue_streams: self.ue_streams,
            macro_power_w: dbm_to_w(self.macro_power_dbm),
            small_power_w: dbm_to_w(self.small_power_dbm),
            macro_carrier_hz: self.macro_carrier_ghz * 1e9,
            small_carrier_hz: self.small_carrier_ghz * 1e9,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrefsConfig {
    pub builder: PrefBuilder,
    /// Drop pairs whose interference-free SINR is below `sinr_floor_db`.
    pub range_filter: bool,
    pub sinr_floor_db: f64,
    pub cqi: CqiQuantizer,
}

impl Default for PrefsConfig {
    fn default() -> Self {
        Self {
            builder: PrefBuilder::Norm,
            range_filter: true,
            sinr_floor_db: -10.0,
            cqi: CqiQuantizer::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwapConfig {
    /// Defaults to `10 * K`.
    pub max_sweeps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub out: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub dump_samples: bool,
    pub event_log: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 1,
            schemes: GameKind::ALL.iter().map(|g| Scheme::Game(*g)).collect(),
            out: PathBuf::from("results"),
            jobs: 0,
            dump_samples: false,
            event_log: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologyConfig,
    pub channel: ChannelParams,
    pub noise: NoiseParams,
    pub prefs: PrefsConfig,
    pub multigame: MultiGameConfig,
    pub swap: SwapConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            SimError::Config(msg) => SimError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(SimError::Config(m.to_string()));
        let t = &self.topology;
        if self.run.trials == 0 {
            return fail("run.trials must be at least 1");
        }
        if self.run.schemes.is_empty() {
            return fail("run.schemes must name at least one scheme");
        }
        if t.num_bs() == 0 {
            return fail("topology needs at least one base station");
        }
        if t.macro_quota == 0 || t.small_quota == 0 {
            return fail("quotas must be at least 1");
        }
        if self.multigame.rounds == 0 {
            return fail("multigame.rounds must be at least 1");
        }
        if self.channel.clusters == 0 || self.channel.rays == 0 {
            return fail("channel.clusters and channel.rays must be at least 1");
        }
        if t.ue_streams == 0 || t.ue_streams > t.ue_upa[0] * t.ue_upa[1] {
            return fail("topology.ue_streams must be within 1..=UE antenna count");
        }
        if t.load_factor.is_some_and(|f| f.is_nan() || f < 0.0) {
            return fail("topology.load_factor must be non-negative");
        }
        t.layout().map(|_| ())
    }
}

/// One trial's realization, shared by every scheme.
pub struct Trial {
    pub index: usize,
    pub seed: u64,
    pub ctx: RateContext,
    pub isolated_sinr: Vec<Vec<f64>>,
    pub mask: RangeMask,
}

pub fn realize_trial(cfg: &ExperimentConfig, index: usize) -> Result<Trial> {
    let seed = cfg.run.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = cfg.topology.layout()?.realize(cfg.topology.effective_ue_count(), &mut rng)?;
    let channels = ChannelSet::generate(&mut rng, &topo, &cfg.channel);
    let ctx = RateContext::new(topo, channels, &cfg.noise)?;
    let isolated_sinr = ctx.isolated_sinr_table();
    let floor = cfg.prefs.range_filter.then_some(cfg.prefs.sinr_floor_db);
    let mask = RangeMask::from_sinr(&isolated_sinr, floor);
    Ok(Trial {
        index,
        seed,
        ctx,
        isolated_sinr,
        mask,
    })
}

/// Result of one scheme on one trial.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub beta: AssociationVector,
    pub metrics: TrialMetrics,
    /// Per-UE `(delay, power)` for associated UEs of game-based schemes.
    pub per_ue: Vec<Option<(f64, f64)>>,
    pub traces: Vec<GameTrace>,
}

/// Single-game preferences for the configured builder.
pub fn single_game_prefs(cfg: &ExperimentConfig, trial: &Trial) -> Result<PreferenceLists> {
    let ctx = &trial.ctx;
    Ok(match cfg.prefs.builder {
        PrefBuilder::Norm => build_by_channel_norm(ctx.channels(), &trial.mask),
        PrefBuilder::Rate => build_by_rate(ctx, &AssociationVector::unassociated(ctx.num_ue()), &trial.mask)?,
        PrefBuilder::Cqi => build_by_cqi(&trial.isolated_sinr, &cfg.prefs.cqi, &trial.mask, ctx.num_bs()),
    })
}

pub fn run_scheme(cfg: &ExperimentConfig, trial: &Trial, scheme: Scheme) -> Result<SchemeOutcome> {
    let ctx = &trial.ctx;
    let quotas = ctx.topology().quotas();
    let kk = ctx.num_ue();
    let plain = |beta: AssociationVector| -> Result<SchemeOutcome> {
        let utility = ctx.utility(&beta)?;
        Ok(SchemeOutcome {
            scheme,
            metrics: TrialMetrics::without_trace(&beta, utility),
            per_ue: vec![None; kk],
            beta,
            traces: Vec::new(),
        })
    };
    match scheme {
        Scheme::Game(kind) => {
            let input = GameInput::new(single_game_prefs(cfg, trial)?, quotas)?;
            let result = play(kind, &input);
            let metrics = TrialMetrics::from_game(&result, ctx.utility(&result.beta)?);
            let delay = crate::metrics::association_delay(&result.trace, kind);
            let per_ue = delay
                .iter()
                .zip(&result.trace.applications)
                .map(|(d, p)| d.map(|d| (d as f64, *p as f64)))
                .collect();
            Ok(SchemeOutcome {
                scheme,
                beta: result.beta.clone(),
                metrics,
                per_ue,
                traces: vec![result.trace],
            })
        }
        Scheme::Multi(kind) => {
            let mg = MultiGameConfig {
                inner: kind,
                ..cfg.multigame.clone()
            };
            let out = run_multigame(&mg, ctx, &trial.mask)?;
            // The association is only final after the last game, so delay is
            // the total iteration count; power sums applications over games.
            let total_iters: u32 = out.games.iter().map(|g| g.trace.iterations).sum();
            let per_ue: Vec<Option<(f64, f64)>> = (0..kk)
                .map(|k| {
                    out.best.get(k).map(|_| {
                        let appl: u32 = out.games.iter().map(|g| g.trace.applications[k]).sum();
                        (total_iters as f64, appl as f64)
                    })
                })
                .collect();
            let metrics = TrialMetrics {
                delays: per_ue.iter().flatten().map(|p| p.0).collect(),
                powers: per_ue.iter().flatten().map(|p| p.1).collect(),
                unassociated_fraction: crate::metrics::unassociated_fraction(&out.best),
                utility: out.tracker.best_utility,
                iterations: total_iters,
            };
            Ok(SchemeOutcome {
                scheme,
                beta: out.best,
                metrics,
                per_ue,
                traces: out.games.into_iter().map(|g| g.trace).collect(),
            })
        }
        Scheme::MaxSinr => plain(max_sinr_association(&trial.isolated_sinr, &quotas)),
        Scheme::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(trial.seed);
            rng.set_stream(1);
            plain(random_association(&mut rng, ctx.num_bs(), kk, &quotas))
        }
        Scheme::Swap => {
            let initial = max_sinr_association(&trial.isolated_sinr, &quotas);
            let sweeps = cfg.swap.max_sweeps.unwrap_or(10 * kk.max(1));
            let out = centralized_swap(ctx, &initial, sweeps)?;
            let mut o = plain(out.beta)?;
            o.metrics.iterations = out.moves as u32;
            Ok(o)
        }
    }
}

/// All scheme outcomes of one trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub ue_count: usize,
    pub bs_count: usize,
    pub outcomes: Vec<SchemeOutcome>,
}

pub fn run_trial(cfg: &ExperimentConfig, index: usize) -> Result<TrialRecord> {
    let trial = realize_trial(cfg, index)?;
    let outcomes = cfg
        .run
        .schemes
        .iter()
        .map(|s| run_scheme(cfg, &trial, *s))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRecord {
        trial: index,
        ue_count: trial.ctx.num_ue(),
        bs_count: trial.ctx.num_bs(),
        outcomes,
    })
}

/// Runs every trial, in parallel up to `run.jobs` threads, in trial order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.jobs)
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..cfg.run.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect())
}

pub const RESULTS_HEADER: &str = "trial,scheme,K,J,avg_delay,p25_delay,p75_delay,avg_power,unassoc_frac,utility,iters";

pub const SUMMARY_HEADER: &str = "scheme,trials,mean_delay,p25_delay,median_delay,p75_delay,mean_power,p25_power,p75_power,\
mean_unassoc_frac,mean_utility,p25_utility,p75_utility,mean_iters,max_iters";

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn result_row(rec: &TrialRecord, o: &SchemeOutcome) -> String {
    let m = &o.metrics;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        rec.trial,
        o.scheme,
        rec.ue_count,
        rec.bs_count,
        opt(m.avg_delay()),
        opt(percentile(&m.delays, 25.0)),
        opt(percentile(&m.delays, 75.0)),
        opt(m.avg_power()),
        m.unassociated_fraction,
        m.utility,
        m.iterations
    )
}

pub fn summary_rows(records: &[TrialRecord]) -> Vec<String> {
    let Some(first) = records.first() else { return Vec::new() };
    first
        .outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| {
            let metrics: Vec<TrialMetrics> = records.iter().map(|r| r.outcomes[i].metrics.clone()).collect();
            let a = aggregate(&metrics)?;
            Some(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                o.scheme,
                a.trials,
                opt(a.delay.as_ref().map(|s| s.mean)),
                opt(a.delay.as_ref().map(|s| s.p25)),
                opt(a.delay.as_ref().map(|s| s.median)),
                opt(a.delay.as_ref().map(|s| s.p75)),
                opt(a.power.as_ref().map(|s| s.mean)),
                opt(a.power.as_ref().map(|s| s.p25)),
                opt(a.power.as_ref().map(|s| s.p75)),
                a.unassociated.mean,
                a.utility.mean,
                a.utility.p25,
                a.utility.p75,
                a.iterations.mean,
                a.iterations.max
            ))
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| SimError::io(path, e))
}

fn write_lines(path: &Path, header: &str, lines: impl IntoIterator<Item = String>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| SimError::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for l in lines {
        writeln!(w, "{l}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn sample_lines(records: &[TrialRecord], prefix: &str) -> Vec<String> {
    let mut out = Vec::new();
    for r in records {
        for o in &r.outcomes {
            for (k, s) in o.per_ue.iter().enumerate() {
                let bs = o.beta.get(k).map_or_else(String::new, |j| j.to_string());
                let (d, p) = s.map_or((String::new(), String::new()), |(d, p)| (d.to_string(), p.to_string()));
                out.push(format!("{prefix}{},{},{k},{bs},{d},{p}", r.trial, o.scheme));
            }
        }
    }
    out
}

fn write_event_logs(dir: &Path, records: &[TrialRecord], tag: &str) -> Result<()> {
    let dir = dir.join("events");
    fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    for r in records {
        for o in &r.outcomes {
            for (g, trace) in o.traces.iter().enumerate() {
                let name = if o.traces.len() == 1 {
                    format!("{tag}trial{:04}_{}.tsv", r.trial, o.scheme)
                } else {
                    format!("{tag}trial{:04}_{}_g{g}.tsv", r.trial, o.scheme)
                };
                let path = dir.join(name);
                let mut w = create(&path)?;
                trace.write_event_log(&mut w).map_err(|e| SimError::io(&path, e))?;
                w.flush().map_err(|e| SimError::io(&path, e))?;
            }
        }
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))
}

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub samples: Option<PathBuf>,
    pub records: Vec<TrialRecord>,
}

/// Runs all trials and writes `results.csv`, `summary.csv` and, on request,
/// `samples.csv` and `events/*.tsv` under `run.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let out = &cfg.run.out;
    ensure_dir(out)?;
    let records = run_trials(cfg)?;
    let results = out.join("results.csv");
    write_lines(
        &results,
        RESULTS_HEADER,
        records.iter().flat_map(|r| r.outcomes.iter().map(move |o| result_row(r, o))),
    )?;
    let summary = out.join("summary.csv");
    write_lines(&summary, SUMMARY_HEADER, summary_rows(&records))?;
    let samples = if cfg.run.dump_samples {
        let p = out.join("samples.csv");
        write_lines(&p, "trial,scheme,ue,bs,delay,power", sample_lines(&records, ""))?;
        Some(p)
    } else {
        None
    };
    if cfg.run.event_log {
        write_event_logs(out, &records, "")?;
    }
    Ok(RunOutput {
        results,
        summary,
        samples,
        records,
    })
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// UE count.
    K,
    /// Total BS count; one macro plus `J - 1` small cells by default.
    J,
    /// Quota of every small cell.
    ScbsQuota,
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "K" | "k" => Ok(SweepAxis::K),
            "J" | "j" => Ok(SweepAxis::J),
            "scbs_quota" | "scbs-quota" => Ok(SweepAxis::ScbsQuota),
            other => Err(format!("unknown sweep axis `{other}` (K | J | scbs_quota)")),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::K => "K",
            SweepAxis::J => "J",
            SweepAxis::ScbsQuota => "scbs_quota",
        })
    }
}

/// `cfg` with one axis set to `value`.
pub fn apply_axis(cfg: &ExperimentConfig, axis: SweepAxis, value: usize) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    let t = &mut c.topology;
    match axis {
        SweepAxis::K => {
            t.ue_count = value;
            t.load_factor = None;
        }
        SweepAxis::J => {
            if value <= t.macro_count {
                return Err(SimError::Config(format!(
                    "J = {value} leaves no small cells next to {} macro cells",
                    t.macro_count
                )));
            }
            t.small_count = value - t.macro_count;
            t.small_positions = None;
        }
        SweepAxis::ScbsQuota => {
            if value == 0 {
                return Err(SimError::Config("small-cell quota must be at least 1".into()));
            }
            t.small_quota = value;
        }
    }
    c.validate()?;
    Ok(c)
}

/// Runs one experiment per axis value and writes combined
/// `sweep_results.csv` / `sweep_summary.csv` keyed by `axis,value`.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[usize]) -> Result<Vec<(usize, Vec<TrialRecord>)>> {
    if values.is_empty() {
        return Err(SimError::Config("sweep needs at least one value".into()));
    }
    let out = &cfg.run.out;
    ensure_dir(out)?;
    let mut all = Vec::with_capacity(values.len());
    for &v in values {
        let c = apply_axis(cfg, axis, v)?;
        all.push((v, run_trials(&c)?));
    }
    let prefix = |v: usize| format!("{axis},{v},");
    write_lines(
        &out.join("sweep_results.csv"),
        &format!("axis,value,{RESULTS_HEADER}"),
        all.iter().flat_map(|(v, recs)| {
            recs.iter()
                .flat_map(move |r| r.outcomes.iter().map(move |o| format!("{}{}", prefix(*v), result_row(r, o))))
        }),
    )?;
    write_lines(
        &out.join("sweep_summary.csv"),
        &format!("axis,value,{SUMMARY_HEADER}"),
        all.iter().flat_map(|(v, recs)| summary_rows(recs).into_iter().map(move |l| format!("{}{l}", prefix(*v)))),
    )?;
    if cfg.run.dump_samples {
        write_lines(
            &out.join("sweep_samples.csv"),
            "axis,value,trial,scheme,ue,bs,delay,power",
            all.iter().flat_map(|(v, recs)| sample_lines(recs, &prefix(*v))),
        )?;
    }
    if cfg.run.event_log {
        for (v, recs) in &all {
            write_event_logs(out, recs, &format!("{axis}{v}_"))?;
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in [
            "da",
            "ea-base",
            "ea-plu",
            "ea-plu-ra",
            "multi-da",
            "multi-ea-plu-ra",
            "max-sinr",
            "random",
            "swap",
        ] {
            assert_eq!(s.parse::<Scheme>().unwrap().to_string(), s);
        }
        assert!("multi-swap".parse::<Scheme>().is_err());
        assert!(parse_schemes("da, bogus").is_err());
    }

    #[test]
    fn empty_config_gives_default_scenario() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.topology.num_bs(), 5);
        assert_eq!(cfg.topology.total_quota(), 35);
        assert_eq!(cfg.topology.effective_ue_count(), 35);
        assert_eq!(cfg.channel.clusters, 5);
        assert_eq!(cfg.channel.rays, 10);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ExperimentConfig::parse("[topology]\nue_count = 35\nmacro_quota = \"x\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = ExperimentConfig::parse("[topology]\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(ExperimentConfig::parse("[run]\ntrials = 0\n").is_err());
        assert!(ExperimentConfig::parse("[run]\nschemes = [\"nope\"]\n").is_err());
    }

    #[test]
    fn load_factor_sets_ue_count() {
        let cfg = ExperimentConfig::parse("[topology]\nload_factor = 1.2\n").unwrap();
        assert_eq!(cfg.topology.effective_ue_count(), 42);
        let cfg = ExperimentConfig::parse("[topology]\nload_factor = 0.8\n").unwrap();
        assert_eq!(cfg.topology.effective_ue_count(), 28);
    }

    #[test]
    fn j_axis_adds_small_cells() {
        let cfg = ExperimentConfig::default();
        let c = apply_axis(&cfg, SweepAxis::J, 7).unwrap();
        assert_eq!(c.topology.small_count, 6);
        assert_eq!(c.topology.total_quota(), 15 + 6 * 5);
        assert!(apply_axis(&cfg, SweepAxis::J, 1).is_err());
        let q = apply_axis(&cfg, SweepAxis::ScbsQuota, 8).unwrap();
        assert_eq!(q.topology.total_quota(), 15 + 32);
    }
}
