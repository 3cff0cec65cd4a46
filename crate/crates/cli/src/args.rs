use std::path::PathBuf;

use anytime_core::config::RawConfig;
use anytime_core::mc_sim::CheckAssignment;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "anytime",
    version,
    about = "Density evolution, delay exponents and Monte Carlo for bilayer anytime SC-LDPC codes"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// key=value configuration file; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Density-evolution convergence tolerance (max-norm)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Density-evolution iteration budget per decoding time
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed for simulations
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub code: CodeArgs,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// Source layer variable degree [default: 3]
    #[arg(long, global = true)]
    pub dv1: Option<usize>,
    /// Source layer check degree [default: 6]
    #[arg(long, global = true)]
    pub dc1: Option<usize>,
    /// Source layer coupling decay, in (0, 1) [default: 0.1]
    #[arg(long, global = true)]
    pub lambda1: Option<f64>,
    /// Relay layer variable degree; 0 removes the layer [default: 2]
    #[arg(long, global = true)]
    pub dv2: Option<usize>,
    /// Relay layer check degree [default: 8]
    #[arg(long, global = true)]
    pub dc2: Option<usize>,
    /// Relay layer coupling decay [default: 0.1]
    #[arg(long, global = true)]
    pub lambda2: Option<f64>,
    /// Source-destination erasure probability [default: 0.7]
    #[arg(long, global = true)]
    pub eps_sd: Option<f64>,
    /// Source-relay erasure probability, recorded only [default: 0]
    #[arg(long, global = true)]
    pub eps_sr: Option<f64>,
    /// Relay-destination erasure probability, recorded only [default: 0]
    #[arg(long, global = true)]
    pub eps_rd: Option<f64>,
}

impl CodeArgs {
    pub fn raw(&self) -> RawConfig {
        RawConfig {
            dv1: self.dv1,
            dc1: self.dc1,
            lambda1: self.lambda1,
            dv2: self.dv2,
            dc2: self.dc2,
            lambda2: self.lambda2,
            eps_sd: self.eps_sd,
            eps_sr: self.eps_sr,
            eps_rd: self.eps_rd,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Erasure curves P_e(i, i+d) from density evolution
    De(DeArgs),
    /// Fitted vs theoretical delay exponents over a lambda1 sweep
    Exponent(ExponentArgs),
    /// Analytical threshold of the exponential decay bound
    Threshold(ThresholdArgs),
    /// Monte Carlo erasure curves on explicit graphs
    Simulate(SimulateArgs),
    /// Monte Carlo against density evolution
    Compare(CompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::De(_) => "de",
            Command::Exponent(_) => "exponent",
            Command::Threshold(_) => "threshold",
            Command::Simulate(_) => "simulate",
            Command::Compare(_) => "compare",
        }
    }
}

#[derive(Debug, Args)]
pub struct DeArgs {
    /// Message indices, comma separated
    #[arg(long = "i", value_delimiter = ',', default_value = "20")]
    pub messages: Vec<usize>,
    /// Largest delay
    #[arg(long, default_value_t = 60)]
    pub dmax: usize,
    /// Solve each decoding time from scratch instead of warm starting
    #[arg(long)]
    pub cold_start: bool,
    /// Values below this are written as 0
    #[arg(long, default_value_t = 1e-14)]
    pub pe_floor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    All,
    I,
    Ii,
    Iii,
    Iv,
    /// dv1, dc1, dv2, dc2, lambda2 from the configuration
    Custom,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::All)]
    pub family: FamilyArg,
    /// lambda1 values, comma separated
    #[arg(long, default_value = "0.05,0.1,0.15,0.2")]
    pub lambda1_grid: String,
    /// Message index of the fitted curve
    #[arg(long = "i", default_value_t = 20)]
    pub message: usize,
    #[arg(long, default_value_t = 60)]
    pub dmax: usize,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Also search the (dv1-1, dv2) and (dv1, dv2-1) exponent pairs
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub beta_max: f64,
    /// Log-spaced beta grid size
    #[arg(long, default_value_t = 60)]
    pub beta_points: usize,
    /// d ranges over 0..=d-max
    #[arg(long, default_value_t = 200)]
    pub d_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AssignmentArg {
    Balanced,
    Uniform,
}

impl From<AssignmentArg> for CheckAssignment {
    fn from(a: AssignmentArg) -> Self {
        match a {
            AssignmentArg::Balanced => CheckAssignment::Balanced,
            AssignmentArg::Uniform => CheckAssignment::Uniform,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Variables per position
    #[arg(long = "M", visible_alias = "m", default_value_t = 1000)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Message indices, comma separated
    #[arg(long = "i", value_delimiter = ',', default_value = "20")]
    pub messages: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub dmax: usize,
    /// Stream length (default: last decoding time plus 8/lambda)
    #[arg(long)]
    pub positions: Option<usize>,
    /// Erasure-free positions before the stream (default: 8/lambda)
    #[arg(long)]
    pub known_prefix: Option<usize>,
    /// How edges are spread over the checks of a position
    #[arg(long, value_enum, default_value_t = AssignmentArg::Balanced)]
    pub assignment: AssignmentArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Add a pe_de column from density evolution
    #[arg(long)]
    pub overlay: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Delays where the DE value is below this are left out of the summary
    #[arg(long, default_value_t = 1e-2)]
    pub min_pe: f64,
}
