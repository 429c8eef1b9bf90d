//! Command-line front end: configuration, experiment dispatch, artifacts.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod output;

use clap::{Args, Parser, Subcommand};
use config::{Experiment, ExperimentConfig};
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinnet", version, about = "Spin-qubit surface-code and shuttling simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the GHZ preparation on every measurement branch
    GhzVerify(RunArgs),
    /// Per-round error distribution of the stabilizer circuit
    RoundDistribution(RunArgs),
    /// Logical error rates and threshold crossing
    Threshold(RunArgs),
    /// Single-electron transfer for a set of durations
    Shuttle(RunArgs),
    /// Stark phase error along one transfer, with and without compensation
    Stark(RunArgs),
    /// Cycle time versus Rabi frequency
    Timing(RunArgs),
}

impl Command {
    pub fn split(&self) -> (Experiment, &RunArgs) {
        match self {
            Command::GhzVerify(a) => (Experiment::GhzVerify, a),
            Command::RoundDistribution(a) => (Experiment::RoundDistribution, a),
            Command::Threshold(a) => (Experiment::Threshold, a),
            Command::Shuttle(a) => (Experiment::Shuttle, a),
            Command::Stark(a) => (Experiment::Stark, a),
            Command::Timing(a) => (Experiment::Timing, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config; missing keys take their defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Config file (or defaults) with command-line flags applied on top.
pub fn resolve(exp: Experiment, args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => config::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    cfg.validate(exp)?;
    cfg.experiment = Some(exp);
    Ok(cfg)
}

pub struct Report {
    pub lines: Vec<String>,
    pub out: PathBuf,
}

/// Runs one experiment on a pool of `cfg.threads` workers and writes its
/// artifacts, the resolved config and a manifest into `cfg.out`.
pub fn run_experiment(exp: Experiment, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate(exp)?;
    let out = cfg.out.clone();
    let io = |e: std::io::Error| CliError::Runtime(anyhow::anyhow!("creating {}: {e}", out.display()));
    std::fs::create_dir_all(&out).map_err(io)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().map_err(anyhow::Error::from)?;
    let outcome = pool.install(|| match exp {
        Experiment::GhzVerify => experiments::ghz_verify(cfg, &out),
        Experiment::RoundDistribution => experiments::round_distribution(cfg, &out),
        Experiment::Threshold => experiments::threshold(cfg, &out),
        Experiment::Shuttle => experiments::shuttle(cfg, &out),
        Experiment::Stark => experiments::stark(cfg, &out),
        Experiment::Timing => experiments::timing(cfg, &out),
    })?;
    output::write_json(&out.join("config.json"), cfg)?;
    let manifest = json!({
        "tool": "spinnet",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": spinnet::VERSION,
        "experiment": exp.name(),
        "rerun": format!("spinnet {} --config config.json", exp.name()),
        "config": cfg,
        "artifacts": outcome.artifacts,
        "summary": outcome.summary,
    });
    output::write_json(&out.join("manifest.json"), &manifest)?;
    Ok(Report { lines: outcome.lines, out })
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let (exp, args) = cli.command.split();
    let cfg = resolve(exp, args)?;
    run_experiment(exp, &cfg)
}
