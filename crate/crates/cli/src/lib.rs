//! Command-line front end for `hrc-risk`.
//!
//! [`run`] executes a parsed [`Cli`] and returns the files it wrote; the
//! `hrc-risk` binary maps a [`CliError`] to its exit code.

pub mod commands;
pub mod config;
pub mod error;
pub mod export;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hrc_risk::estimator::Method;

pub use config::{ExperimentConfig, Preset};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hrc-risk", version, about = "Uncertainty-aware collision risk analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run trials at one fixed uncertainty constellation and write trials.csv.
    Simulate(Common),
    /// Estimate the dangerous-event probability with one method.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "grid-is")]
        method: Method,
    },
    /// Compare the estimator variance of Monte Carlo and grid-based IS.
    Compare(Common),
    /// Sweep the uncertainty grid and write the risk surface.
    Sweep(Common),
    /// Apply a safety limit to a (loaded or freshly swept) risk surface.
    Evaluate(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long, value_enum, value_name = "NAME")]
    pub preset: Option<Preset>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed; overrides `seed` from the config.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism). Outputs do not depend on it.
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "hrc-risk-out";

impl Common {
    /// Resolved configuration and output directory.
    pub fn resolve(&self) -> Result<(ExperimentConfig, PathBuf), CliError> {
        let mut config = match (&self.config, self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(preset)) => preset.config(),
            (None, None) => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        let out = self
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        Ok((config, out))
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Simulate(c) | Command::Compare(c) | Command::Sweep(c) | Command::Evaluate(c) => c,
            Command::Estimate { common, .. } => common,
        }
    }
}

/// Runs one command inside a worker pool of the requested size.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let common = cli.command.common();
    if common.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let (config, out) = common.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", common.workers.unwrap_or(0))))?;
    pool.install(|| match &cli.command {
        Command::Simulate(_) => commands::simulate(&config, &out),
        Command::Estimate { method, .. } => commands::estimate(&config, *method, &out),
        Command::Compare(_) => commands::compare(&config, &out),
        Command::Sweep(_) => commands::sweep(&config, &out),
        Command::Evaluate(_) => commands::evaluate(&config, &out),
    })
}
