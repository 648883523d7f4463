use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grouptest::Family;

/// Two-stage pooled testing: designs, decoding, bounds and simulation.
#[derive(Parser, Debug)]
#[command(name = "grouptest", version, about)]
pub struct Cli {
    /// JSON object supplying values for any flag; flags on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a pool design and write it with a metadata sidecar
    Design(DesignArgs),
    /// Run the first stage on an assignment and decode it
    Decode(DecodeArgs),
    /// Evaluate an analytic quantity
    Analyze(AnalyzeArgs),
    /// Estimate the expected number of tests
    Simulate(SimulateArgs),
    /// Sweep N and emit a table of bounds and estimates
    Experiment(ExperimentArgs),
    /// Run the acceptance battery
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
pub struct DesignArgs {
    /// rr6, rp or pp
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Defect probability; picks the optimal L and M when they are not given
    #[arg(long)]
    pub p: Option<f64>,
    /// Tests per variable (mean for pp)
    #[arg(long)]
    pub l: Option<u64>,
    /// Number of tests
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_restarts: Option<u32>,
    /// Output file; `.json` selects JSON, anything else the adjacency format
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Force the output format (json or adjacency)
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct DecodeArgs {
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Assignment as a binary string or 0x-prefixed hex
    #[arg(long)]
    pub x: Option<String>,
    /// File holding the assignment string
    #[arg(long, conflicts_with = "x")]
    pub x_file: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    #[value(name = "B")]
    #[serde(rename = "B")]
    B,
    #[value(name = "U")]
    #[serde(rename = "U")]
    U,
    #[value(name = "c")]
    #[serde(rename = "c")]
    C,
    LowerBound,
    UpperBound,
    #[value(name = "Rp")]
    #[serde(rename = "Rp")]
    Rp,
    #[value(name = "H")]
    #[serde(rename = "H")]
    H,
    PpU0,
    PpOpt,
    Params,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Debug, Default)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub quantity: Option<Quantity>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Design file (for B)
    #[arg(long)]
    pub design: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    /// Test-count estimate fed to H; defaults to the regular upper bound
    #[arg(long)]
    pub t_bar: Option<f64>,
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    /// Simulate a stored design
    #[arg(long, conflicts_with = "family")]
    pub design: Option<PathBuf>,
    /// Average over random designs of a family instead
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub l: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    /// Assignments per design
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub design_samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumerate all assignments instead of sampling (stored designs, N <= 24)
    #[arg(long)]
    pub exact: bool,
    /// `.csv` or `.json`; JSON on stdout otherwise
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `p = N^(-beta)`
    #[value(name = "beta_sweep")]
    BetaSweep,
    /// `p` fixed while `N` grows
    #[value(name = "fixed_p_sweep")]
    FixedPSweep,
}

#[derive(Args, Debug, Default)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Fixed defect probability for fixed_p_sweep
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated N values; `2^k` accepted
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<String>>,
    /// Comma-separated families
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<Family>>,
    /// Assignments per design; chosen from a pilot run when absent
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub design_samples: Option<u64>,
    /// Largest N that gets a Monte Carlo estimate
    #[arg(long)]
    pub mc_max_n: Option<u64>,
    /// Cap on adaptively chosen trials
    #[arg(long)]
    pub max_trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the table as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    /// Run only these criteria (comma-separated numbers)
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
}
