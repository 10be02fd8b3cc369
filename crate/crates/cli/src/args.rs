use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "urllc-lab",
    version,
    about = "Delay and peak-age violation analysis for short-packet links"
)]
pub struct Cli {
    /// JSON file with parameters; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RCUs frame error probability.
    Rcus(RcusArgs),
    /// Threshold-decoding stopping time and error terms along a threshold grid.
    VlsfBound(VlsfArgs),
    /// Steady-state delay CCDF `P[Δ >= d]`.
    DelayCcdf(DelayCcdfArgs),
    /// Delay-violation probability for one or more thresholds.
    DelayViolation(DelayViolationArgs),
    /// Network-calculus delay bound next to the exact tail.
    SncBound(SncArgs),
    /// Maximum arrival rate and throughput over a range of frame sizes.
    Throughput(ThroughputArgs),
    /// Peak-age CCDF `P[Π >= a]`.
    AgeCcdf(AgeCcdfArgs),
    /// Peak-age violation probability versus arrival rate.
    AgeViolation(AgeViolationArgs),
    /// Peak-age violation limit as the arrival probability tends to 1.
    HighRateLimit(HighRateArgs),
    /// Discrete-event simulation of a delay or peak-age CCDF.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceChoice {
    Arq,
    Vlsf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Exact,
    Saddlepoint,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Sync,
    Async,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundChoice {
    Exact,
    Snc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimChoice {
    Sync,
    Async,
    Age,
}

/// Channel and service parameters shared by most subcommands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelArgs {
    /// Frame size in channel uses.
    #[arg(long)]
    pub n: Option<usize>,
    /// Information bits per packet.
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Frame error probability; skips the RCUs computation.
    #[arg(long)]
    pub eps_frame: Option<f64>,
    #[arg(long, value_enum)]
    pub service: Option<ServiceChoice>,
    /// Decoding threshold in nats (VLSF service).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Maximum number of frames (VLSF service).
    #[arg(long)]
    pub ell_max: Option<usize>,
    /// Monte Carlo samples for RCUs or VLSF estimates.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RcusArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// Frame sizes `lo:hi[:step]`; overrides `--n`.
    #[arg(long)]
    pub n_range: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct VlsfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// Comma-separated thresholds in nats.
    #[arg(long)]
    pub gammas: Option<String>,
    /// Number of points of the default threshold grid.
    #[arg(long)]
    pub gamma_points: Option<usize>,
    /// With `--d0`, also evaluates the delay violation at this arrival probability.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub d0: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DelayCcdfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Largest delay on the grid (frames, or channel uses for `--model async`).
    #[arg(long)]
    pub dmax: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DelayViolationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated delay thresholds in channel uses.
    #[arg(long)]
    pub d0: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SncArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated delay thresholds in channel uses.
    #[arg(long)]
    pub d0: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ThroughputArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub d0: Option<u64>,
    /// Target delay-violation probability.
    #[arg(long)]
    pub target: Option<f64>,
    /// Frame sizes `lo:hi[:step]`.
    #[arg(long)]
    pub n_range: Option<String>,
    #[arg(long, value_enum)]
    pub bound: Option<BoundChoice>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct AgeCcdfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// DWT, KTN, KTL or LCFS_S.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Largest peak age on the grid, in frames.
    #[arg(long)]
    pub amax: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct AgeViolationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// A policy name or `all`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Comma-separated arrival probabilities.
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Age threshold in channel uses.
    #[arg(long)]
    pub a0: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct HighRateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// A policy name or `all`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Comma-separated age thresholds in channel uses.
    #[arg(long)]
    pub a0: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum)]
    pub kind: Option<SimChoice>,
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Recorded bulks, packets or departures.
    #[arg(long)]
    pub events: Option<u64>,
    #[arg(long)]
    pub warmup: Option<u64>,
    /// Largest `k` of the reported `P[X > k]`.
    #[arg(long)]
    pub kmax: Option<usize>,
}
