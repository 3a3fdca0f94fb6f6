use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::smoothing::Kernel;
use crate::solver::Method;

#[derive(Debug, Parser)]
#[command(
    name = "plm-enet",
    version,
    about = "Elastic Net for partially linear models y = x'b + f(t) + e"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one penalized model at given penalties.
    Fit(FitArgs),
    /// Cross-validate the tuned penalty, then refit on all rows.
    Cv(CvArgs),
    /// Run the duplicated-column comparison experiment.
    Simulate(SimulateArgs),
    /// Group-effect bound for coefficient pairs of a fit directory.
    GroupEffect(GroupEffectArgs),
    /// Kernel partial-out only.
    Smooth(SmoothArgs),
    /// Write a synthetic dataset.
    Generate(GenerateArgs),
    /// Repeat a run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long, default_value = "t")]
    pub covariate: String,
    /// Comma-separated predictor columns (default: all remaining).
    #[arg(long, value_delimiter = ',')]
    pub predictors: Option<Vec<String>>,
    /// Use the raw scale instead of centring y and scaling x.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SmootherArgs {
    #[arg(long, default_value = "box")]
    pub kernel: Kernel,
    /// Fixed bandwidth h.
    #[arg(long, conflicts_with = "bandwidth_c")]
    pub bandwidth: Option<f64>,
    /// Constant c in h = c * n^(-1/5) (default 1).
    #[arg(long)]
    pub bandwidth_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PenaltyArgs {
    #[arg(long, default_value = "enet")]
    pub method: Method,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Adaptive-lasso weight exponent.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Ridge penalty of the adaptive-lasso initial fit (default 1e-3 * n).
    #[arg(long)]
    pub init_lambda2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Report (1 + lambda2) times the naive elastic net estimate.
    #[arg(long)]
    pub rescaled: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Write the coefficient path over a penalty grid to path.csv.
    #[arg(long)]
    pub emit_path: bool,
    /// Predict a second CSV with the same columns.
    #[arg(long)]
    pub predict: Option<PathBuf>,
    /// Classify predictions above this value as 1 (0-1 responses).
    #[arg(long, requires = "predict")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub smoother: SmootherArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 50)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub smoother: SmootherArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 10)]
    pub cv_folds: usize,
    #[arg(long, default_value_t = 50)]
    pub grid_size: usize,
    /// Choose the largest penalty within one standard error of the minimum.
    #[arg(long)]
    pub one_se: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub lambda2: f64,
    #[arg(long, default_value_t = 10)]
    pub cv_folds: usize,
    #[arg(long, default_value_t = 50)]
    pub grid_size: usize,
    #[arg(long, default_value = "box")]
    pub kernel: Kernel,
    #[arg(long, default_value_t = 1.0)]
    pub bandwidth_c: f64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GroupEffectArgs {
    /// Output directory of `fit` or `cv`.
    #[arg(long)]
    pub fit_dir: PathBuf,
    /// `all`, or pairs `k,l;k,l` of 1-based column indices or names.
    #[arg(long, default_value = "all")]
    pub pairs: String,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub smoother: SmootherArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    /// Eight predictors with x3 = x2.
    Dgp,
    /// p > n with correlated groups and a 0-1 response.
    Pggn,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "dgp")]
    pub design: DesignKind,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Column count (pggn only).
    #[arg(long, default_value_t = 500)]
    pub p: usize,
    /// Comma-separated group sizes (pggn only).
    #[arg(long, value_delimiter = ',', default_value = "10,10")]
    pub groups: Vec<usize>,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    /// Replicate index (dgp only).
    #[arg(long, default_value_t = 0)]
    pub rep: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RerunArgs {
    /// manifest.json of an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
