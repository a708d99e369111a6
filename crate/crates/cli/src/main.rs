//! Command-line front end for the association simulator.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hetmatch::runner::{parse_schemes, run_experiment, sweep};
use hetmatch::{ExperimentConfig, PrefBuilder, Scheme, SweepAxis};

#[derive(Parser)]
#[command(name = "hetmatch", version, about = "Matching-game user association in two-tier HetNets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte-Carlo trials and write results.csv / summary.csv.
    Run(Common),
    /// Repeat a run for each value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Swept parameter: K, J or scbs_quota.
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated values, e.g. 20,30,40.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Prefs {
    Norm,
    Rate,
    Cqi,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; built-in defaults otherwise.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated schemes: da, ea-base, ea-plu, ea-plu-ra,
    /// multi-<game>, max-sinr, random, swap.
    #[arg(long, value_parser = parse_scheme_list)]
    schemes: Option<SchemeList>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, short)]
    jobs: Option<usize>,
    /// Preference-list metric.
    #[arg(long, value_enum)]
    prefs: Option<Prefs>,
    /// Skip the SINR range filter so every list is full length.
    #[arg(long)]
    full_lists: bool,
    /// Write per-UE delay/power samples.
    #[arg(long)]
    dump_samples: bool,
    /// Write per-game message logs under events/.
    #[arg(long)]
    event_log: bool,
}

#[derive(Clone)]
struct SchemeList(Vec<Scheme>);

fn parse_scheme_list(s: &str) -> Result<SchemeList, String> {
    parse_schemes(s).map(SchemeList)
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse()
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let run = &mut cfg.run;
        if let Some(t) = self.trials {
            run.trials = t;
        }
        if let Some(s) = self.seed {
            run.seed = s;
        }
        if let Some(s) = &self.schemes {
            run.schemes = s.0.clone();
        }
        if let Some(o) = &self.out {
            run.out = o.clone();
        }
        if let Some(j) = self.jobs {
            run.jobs = j;
        }
        run.dump_samples |= self.dump_samples;
        run.event_log |= self.event_log;
        if let Some(p) = self.prefs {
            cfg.prefs.builder = match p {
                Prefs::Norm => PrefBuilder::Norm,
                Prefs::Rate => PrefBuilder::Rate,
                Prefs::Cqi => PrefBuilder::Cqi,
            };
        }
        if self.full_lists {
            cfg.prefs.range_filter = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.config()?;
            let out = run_experiment(&cfg)?;
            let summary = fs::read_to_string(&out.summary).with_context(|| format!("reading {}", out.summary.display()))?;
            print!("{summary}");
            eprintln!("wrote {}", out.results.display());
        }
        Command::Sweep { common, axis, values } => {
            let cfg = common.config()?;
            sweep(&cfg, axis, &values)?;
            let path = cfg.run.out.join("sweep_summary.csv");
            print!("{}", fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?);
            eprintln!("wrote {}", cfg.run.out.join("sweep_results.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
