//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ginifield",
    version,
    about = "Gini and poverty index estimation with asymptotic confidence intervals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gini index with its plug-in variance and confidence interval.
    Gini(GiniArgs),
    /// Point estimate of a poverty index.
    Gpi(GpiArgs),
    /// Change in the Gini index between two paired income columns.
    DeltaGini(DeltaGiniArgs),
    /// Change in a poverty index between two paired income columns.
    DeltaGpi(PairedGpiArgs),
    /// Ratio of poverty change to Gini change, with a delta-method interval.
    Ratio(PairedGpiArgs),
    /// Lorenz curve points as a two-column CSV.
    Lorenz(LorenzArgs),
    /// Draw a synthetic income sample and write it as CSV.
    Simulate(SimulateArgs),
    /// Monte Carlo check of a plug-in variance or interval.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Reject,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Empirical,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Ecdf,
    Midrank,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Comma-separated file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Income column name; give two (repeated or comma-separated) for paired commands.
    #[arg(
        long = "column",
        visible_alias = "columns",
        value_delimiter = ',',
        required = true
    )]
    pub columns: Vec<String>,
    /// Handling of zero or negative incomes.
    #[arg(long, value_enum, default_value = "reject")]
    pub policy: PolicyArg,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Leave wall-clock timing out of the report.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Confidence level of the reported interval.
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    /// Use midpoint grid quadrature with this many points instead of exact integration.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Copula used for cross-period terms.
    #[arg(long, value_enum, default_value = "empirical")]
    pub coupling: CouplingArg,
    /// Rank weight used in the weighted-mean statistic.
    #[arg(long, value_enum, default_value = "ecdf")]
    pub weighting: WeightingArg,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// `fgt:ALPHA`, `sen`, `kakwani:KAPPA` or `gpi:FILE` for a JSON custom index.
    #[arg(long)]
    pub index: String,
    #[arg(long = "poverty-line")]
    pub poverty_line: f64,
}

#[derive(Debug, Args)]
pub struct GiniArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GpiArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub index: IndexArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DeltaGiniArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PairedGpiArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub index: IndexArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LorenzArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Income law: `exponential[:rate]`, `uniform[:a:b]`, `lognormal[:loc:scale]`, `pareto:alpha[:xm]`.
    #[arg(long, default_value = "exponential:1")]
    pub family: String,
    /// Second-period law for paired designs (defaults to `--family`).
    #[arg(long)]
    pub family2: Option<String>,
    /// `independence`, `gaussian:RHO` or `clayton:THETA`.
    #[arg(long)]
    pub copula: Option<String>,
    /// Second period as `SCALE:SHIFT` times the first, instead of a copula.
    #[arg(long)]
    pub affine: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// sigma2_A, sigma2_GI, sigma2_delta_gini, sigma2_delta_gpi, sigma2_R, ci_GI or ci_delta_gini.
    #[arg(long)]
    pub target: String,
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest accepted relative gap between plug-in and simulated variance.
    #[arg(long, default_value_t = 0.15)]
    pub tolerance: f64,
    #[arg(long)]
    pub index: Option<String>,
    #[arg(long = "poverty-line")]
    pub poverty_line: Option<f64>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Also write per-replicate statistics to this CSV.
    #[arg(long = "replicates-csv")]
    pub replicates_csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}
