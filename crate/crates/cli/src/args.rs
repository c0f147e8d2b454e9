use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sscomp", version, about = "Compile typed hyperparameter schemas and ML pipelines into search spaces")]
pub struct Cli {
    /// Cap on the number of disjuncts any rewrite or product may produce.
    #[arg(long, global = true, env = "SSCOMP_DISJUNCT_CAP", default_value_t = sscomp::normalize::DEFAULT_DISJUNCT_CAP)]
    pub disjunct_cap: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a pipeline into a search space.
    Compile(CompileArgs),
    /// Check a configuration against an operator's schema.
    Validate(ValidateArgs),
    /// Print the normal form of an operator's hyperparameter schema.
    Normalize(NormalizeArgs),
    /// Draw random points from a compiled space.
    Sample(SampleArgs),
    /// Turn a point of a compiled space into a configured pipeline.
    Decode(DecodeArgs),
    /// Random search with cross-validation.
    Search(SearchArgs),
    /// Exhaustive search over a discretized grid with cross-validation.
    #[command(name = "grid-search")]
    GridSearch(GridSearchArgs),
}

#[derive(Debug, Args)]
pub struct RegistryArgs {
    /// Operator registry file; the bundled operators when omitted.
    #[arg(long, short)]
    pub registry: Option<PathBuf>,

    /// Drop every side constraint, keeping only each operator's leading record.
    #[arg(long)]
    pub no_constraints: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Flat,
    Grid,
    Nested,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Pipeline file.
    pub pipeline: PathBuf,
    #[command(flatten)]
    pub registry: RegistryArgs,
    #[arg(long, short, value_enum, default_value = "flat")]
    pub backend: BackendArg,
    /// Values per continuous range for the grid backend.
    #[arg(long, default_value_t = sscomp::backends::DEFAULT_CUTS)]
    pub cuts: usize,
    /// Seed for grid discretization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Operator name.
    pub op: String,
    /// Configuration: a JSON file, or an inline JSON object.
    pub config: String,
    #[command(flatten)]
    pub registry: RegistryArgs,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Operator name.
    pub op: String,
    #[command(flatten)]
    pub registry: RegistryArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Space file written by `compile`.
    pub space: PathBuf,
    /// Number of points.
    #[arg(long, short, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Planned pipeline file the space was compiled from.
    pub pipeline: PathBuf,
    /// Space file written by `compile`.
    pub space: PathBuf,
    /// Point file: a flat JSON object.
    pub point: PathBuf,
    #[command(flatten)]
    pub registry: RegistryArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Accuracy,
    ErrorRate,
}

#[derive(Debug, Args)]
pub struct SearchCommon {
    /// Planned pipeline file.
    pub pipeline: PathBuf,
    /// Training data: CSV with a header, numeric features, label last.
    pub data: PathBuf,
    #[command(flatten)]
    pub registry: RegistryArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "error-rate")]
    pub metric: MetricArg,
    /// History file (JSON lines); not written when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Convergence CSV (iteration, best loss so far).
    #[arg(long)]
    pub convergence: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: SearchCommon,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Space to sample from.
    #[arg(long, short, value_enum, default_value = "nested")]
    pub backend: BackendArg,
}

#[derive(Debug, Args)]
pub struct GridSearchArgs {
    #[command(flatten)]
    pub common: SearchCommon,
    #[arg(long, default_value_t = sscomp::backends::DEFAULT_CUTS)]
    pub cuts: usize,
    /// Maximum number of grid points evaluated.
    #[arg(long, default_value_t = sscomp::search::DEFAULT_GRID_CAP)]
    pub cap: usize,
}
