//! Subcommands of the `plumeseek` binary.

pub mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use plumeseek_core::{MotionPolicy, RunConfig, Tier, TrainMode};

pub use commands::bench::{bench, BenchRow};
pub use commands::plot::plot;
pub use commands::simulate::{simulate, PolicySummary, RunSummary, SimulateSummary};
pub use commands::train::{train, TrainRunSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unreadable or invalid config, or a refused overwrite.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<plumeseek_core::Error> for CliError {
    fn from(e: plumeseek_core::Error) -> Self {
        match e {
            plumeseek_core::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "plumeseek", version, about = "Information-driven plume source search experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run search episodes for every seed and motion policy.
    Simulate(Common),
    /// Train per-agent Q-networks in the hybrid environment.
    Train(Common),
    /// Time the FFT scorer against the direct double sum.
    Bench(Common),
    /// Regenerate figures from the CSVs in an output directory.
    Plot(Common),
}

#[derive(Debug, Clone, Args, Default)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed list; repeatable.
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<TrainMode>,
    #[arg(long)]
    pub policy: Option<MotionPolicy>,
    #[arg(long)]
    pub tier: Option<Tier>,
    /// Overwrite existing outputs and lift the exact-tier size limit.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Common {
    /// Loads the config (required) and applies command-line overrides.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Usage("--config is required".into()))?;
        let mut cfg = RunConfig::load(path)?;
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(p) = self.policy {
            cfg.sim.policies = vec![p];
        }
        if let Some(t) = self.tier {
            cfg.planner.tier = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pool(&self) -> CliResult<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Usage("--threads must be >= 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(c) => simulate(c).map(|_| ()),
        Command::Train(c) => train(c).map(|_| ()),
        Command::Bench(c) => bench(c).map(|_| ()),
        Command::Plot(c) => plot(c),
    }
}
