use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "isac-fbl",
    version,
    about = "Finite-blocklength rate-distortion-error bounds and simulations for joint sensing and communication"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; one per core when omitted. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds at a fixed input distribution, one row per blocklength.
    Bounds(BoundsArgs),
    /// Rate-distortion tradeoff curves, one row per (distortion budget, n).
    Sweep(SweepArgs),
    /// Time-sharing baselines next to the joint scheme.
    Baselines(BaselinesArgs),
    /// Monte Carlo run of the random-coding scheme.
    Simulate(SimulateArgs),
    /// Tradeoff curves for the binary channel Y = S X with Z = Y.
    BinaryExample(BinaryExampleArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChannelSource {
    /// JSON channel description.
    #[arg(long, conflicts_with = "binary_q")]
    pub channel: Option<PathBuf>,

    /// Built-in binary channel Y = S X, Z = Y with Pr[S = 1] = q.
    #[arg(long)]
    pub binary_q: Option<f64>,
}

/// `start:stop:count`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{v:?} is not a finite number"))
        };
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{count:?} is not a point count"))?;
        Ok(GridSpec {
            start: num(start)?,
            stop: num(stop)?,
            count,
        })
    }
}

impl GridSpec {
    pub fn points(&self, flag: &str) -> Result<Vec<f64>, String> {
        if self.count == 0 {
            return Err(format!("{flag}: grid is empty (count = 0)"));
        }
        if self.stop < self.start {
            return Err(format!("{flag}: stop {} is below start {}", self.stop, self.start));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub source: ChannelSource,

    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,

    /// Blocklength; repeat for several.
    #[arg(long, required = true)]
    pub n: Vec<u64>,

    /// Pr[X = 1] for two-input channels.
    #[arg(long, conflicts_with = "input")]
    pub alpha: Option<f64>,

    /// Full input distribution, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub input: Option<Vec<f64>>,

    /// Fix the achievability coefficient instead of optimizing it.
    #[arg(long)]
    pub k: Option<f64>,

    /// Fix the converse slack instead of optimizing it.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: ChannelSource,

    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,

    /// Blocklength; repeat for several.
    #[arg(long, default_values_t = [700])]
    pub n: Vec<u64>,

    /// Distortion budgets as start:stop:count; a 60-point grid from D_min to
    /// D_trivial when omitted.
    #[arg(long)]
    pub d_grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BinaryExampleArgs {
    #[arg(long, default_value_t = 0.4)]
    pub binary_q: f64,

    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,

    #[arg(long, default_values_t = [700, 3000, 10_000])]
    pub n: Vec<u64>,

    #[arg(long)]
    pub d_grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BaselinesArgs {
    #[command(flatten)]
    pub source: ChannelSource,

    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,

    #[arg(long, default_value_t = 700)]
    pub n: u64,

    /// Time-sharing fractions as start:stop:count.
    #[arg(long, default_value = "0:1:21")]
    pub gamma_grid: GridSpec,

    /// Budgets for the joint-scheme rows; the default sweep grid when omitted.
    #[arg(long)]
    pub d_grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    #[value(name = "maxinfo")]
    MaxInfo,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompetitorsArg {
    Explicit,
    JointType,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Replay a configuration, either bare or as the `config` object of an
    /// earlier JSON report. Excludes the other run options.
    #[arg(long, conflicts_with_all = ["channel", "binary_q", "n", "msg_count", "rate", "alpha", "input"])]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub source: ChannelSource,

    #[arg(long)]
    pub n: Option<usize>,

    /// Number of messages M.
    #[arg(long, conflicts_with = "rate")]
    pub msg_count: Option<u64>,

    /// Target rate R in bits per use; M = floor(2^(n R)).
    #[arg(long, allow_negative_numbers = true)]
    pub rate: Option<f64>,

    /// Pr[X = 1] for two-input channels.
    #[arg(long, conflicts_with = "input")]
    pub alpha: Option<f64>,

    /// Full input distribution, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub input: Option<Vec<f64>>,

    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    #[arg(long, value_enum, default_value_t = DecoderArg::MaxInfo)]
    pub decoder: DecoderArg,

    /// Threshold in bits for the threshold decoder.
    #[arg(long, conflicts_with = "k", allow_negative_numbers = true)]
    pub threshold: Option<f64>,

    /// Threshold log2(M) + K log2(n); K is optimized for --eps when neither
    /// --threshold nor --k is given.
    #[arg(long)]
    pub k: Option<f64>,

    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Reuse one codebook for all trials.
    #[arg(long)]
    pub fixed_codebook: bool,

    #[arg(long, value_enum, default_value_t = CompetitorsArg::Explicit)]
    pub competitors: CompetitorsArg,

    /// Largest allowed M * n.
    #[arg(long, default_value_t = isac_core::sim::DEFAULT_SYMBOL_CAP)]
    pub symbol_cap: u64,
}
