use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::policy::PolicyKind;
use crate::sweep::Axis;

/// Age-optimal UAV data-collection planner.
///
/// Node numbers on the command line and in every output are 1-based.
/// Set AOI_WORKERS to bound the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "uav-aoi", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write a random scenario.
    Generate(GenerateArgs),
    /// Optimal times and waypoints for a fixed schedule.
    Solve(SolveArgs),
    /// Update counts, NWAoI lower bound and speed bound.
    Bounds(BoundsArgs),
    /// Exhaustive search for the optimal schedule.
    Enumerate(EnumerateArgs),
    /// Train a deep Q-network scheduler.
    TrainDqn(TrainDqnArgs),
    /// Search autoencoder sizes and train the state representation.
    TrainAutoencoder(TrainAutoencoderArgs),
    /// Run one policy on a scenario.
    Eval(EvalArgs),
    /// Mean NWAoI of several policies along a scenario axis.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Solve(_) => "solve",
            Command::Bounds(_) => "bounds",
            Command::Enumerate(_) => "enumerate",
            Command::TrainDqn(_) => "train-dqn",
            Command::TrainAutoencoder(_) => "train-autoencoder",
            Command::Eval(_) => "eval",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 3)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Side of the square region, meters.
    #[arg(long, default_value_t = 1000.0)]
    pub region: f64,
    #[arg(long, default_value_t = 0.1)]
    pub battery_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub battery_max: f64,
    /// Channel gain at 1 m.
    #[arg(long)]
    pub beta0: Option<f64>,
    /// Per-axis speed limit, m/s (`inf` for none).
    #[arg(long, default_value_t = 25.0)]
    pub vmax: f64,
    #[arg(long, default_value_t = 900.0)]
    pub horizon: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Comma-separated node numbers in visiting order, e.g. `1,2,1`.
    #[arg(long, default_value = "")]
    pub schedule: String,
    #[arg(long, default_value_t = uav_aoi_core::qp::DEFAULT_TOL)]
    pub tol: f64,
    /// Uniform samples of the AoI trace.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Maximum number of schedules to solve.
    #[arg(long, default_value_t = uav_aoi_core::enumerator::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Largest total number of updates.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Require at least one update per node.
    #[arg(long)]
    pub no_zero: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReprKind {
    LastColumn,
    Autoencoder,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainDqnArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// TOML policy settings (`[dqn]`, `[env]`, `[autoencoder]`, ...).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReprKind::LastColumn)]
    pub representation: ReprKind,
    /// Autoencoder checkpoint; searched from scratch when absent.
    #[arg(long)]
    pub autoencoder: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainAutoencoderArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Weight-based rollouts collected for the corpus.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Joint cell/hidden sizes to search.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Cell sizes; with `--kh`, searched independently by padding.
    #[arg(long, value_delimiter = ',', requires = "kh")]
    pub kc: Vec<usize>,
    #[arg(long, value_delimiter = ',', requires = "kc")]
    pub kh: Vec<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum)]
    pub policy: PolicyKind,
    /// Agent checkpoint, required for the learned policies.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = uav_aoi_core::enumerator::DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Template for region, channel, UAV and node count.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PolicyKind::Enumerate, PolicyKind::Weight])]
    pub policies: Vec<PolicyKind>,
    /// Number of seeds per value.
    #[arg(long, default_value_t = 50)]
    pub seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Battery range of randomized nodes; defaults to the template's.
    #[arg(long)]
    pub battery_min: Option<f64>,
    #[arg(long)]
    pub battery_max: Option<f64>,
    #[arg(long, default_value_t = uav_aoi_core::enumerator::DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}
