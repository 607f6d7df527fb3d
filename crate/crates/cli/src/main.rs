use std::path::{Path, PathBuf};
use std::process::ExitCode;

use citerank::{Method, Optimizer, PriorPreset, SamplingMode, StartingValue};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;
mod output;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Input(String),
    /// Exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<citerank::Error> for CliError {
    fn from(e: citerank::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "citerank", version, about = "Influence scores for citation networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score every node with one method.
    Score(ScoreArgs),
    /// Fit the Dirichlet hyperparameters by maximum marginal likelihood.
    Fit(FitArgs),
    /// Rank correlations between several methods.
    Compare(CompareArgs),
    /// Monte Carlo half-sampling study.
    Halfsample(HalfsampleArgs),
    /// Self-citation rates and attenuation factors.
    Kappa(KappaArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the table here and the JSON sidecar to `<OUT>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON document to stdout instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CapRule {
    Iterative,
    Closed,
    None,
}

#[derive(Args, Debug, Clone)]
pub struct ScoringArgs {
    /// Two-column `label,count` file of article counts.
    #[arg(long)]
    pub articles: Option<PathBuf>,
    /// Damping for PR and EIFA.
    #[arg(long, default_value_t = 0.85)]
    pub alpha: f64,
    /// Damping for PSJR.
    #[arg(long, default_value_t = 0.9)]
    pub alpha2: f64,
    /// Uniform mixing weight for PSJR.
    #[arg(long, default_value_t = 1e-4)]
    pub beta: f64,
    /// Self-citation clamp used by PSJR.
    #[arg(long, value_enum, default_value_t = CapRule::Iterative)]
    pub cap: CapRule,
    /// Largest share of a row's references that may be self-citations.
    #[arg(long, default_value_t = 0.33)]
    pub cap_share: f64,
    #[command(flatten)]
    pub fit: FitFlags,
}

#[derive(Args, Debug, Clone)]
pub struct FitFlags {
    /// fp, inv, lm or fp+lm.
    #[arg(long, default_value_t = Optimizer::FpThenLm)]
    pub optimizer: Optimizer,
    /// empirical, ones or perks.
    #[arg(long, default_value = "empirical")]
    pub start: StartingValue<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub eps1: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps2: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MaskArg {
    Diag,
    None,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    pub matrix: PathBuf,
    /// pr, eifa, psjr, ebpr or ebef.
    #[arg(long)]
    pub method: Method,
    /// Use a non-informative prior (laplace, jeffreys, perks) instead of a fit.
    #[arg(long)]
    pub prior: Option<PriorPreset>,
    /// Report scores summing to 1000 instead of 1.
    #[arg(long)]
    pub per_thousand: bool,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = MaskArg::Diag)]
    pub mask: MaskArg,
    #[command(flatten)]
    pub fit: FitFlags,
    /// Run every optimizer from every start at eps2 of 1e-5 and 1e-6.
    #[arg(long)]
    pub bench: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum Level {
    /// Article influence when article counts are given, else total.
    Auto,
    Total,
    Article,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    pub matrix: PathBuf,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', required = true)]
    pub methods: Vec<Method>,
    #[arg(long, value_enum, default_value_t = Level::Auto)]
    pub level: Level,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct HalfsampleArgs {
    pub matrix: PathBuf,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "pr,eifa,psjr,ebpr,ebef")]
    pub methods: Vec<Method>,
    /// Number of replicates.
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 10.0)]
    pub a: f64,
    #[arg(long, default_value_t = 10.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// bernoulli or beta-bernoulli.
    #[arg(long, default_value = "beta-bernoulli")]
    pub mode: SamplingMode,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct KappaArgs {
    pub matrix: PathBuf,
    /// Also write the matrix with each diagonal scaled by its κ.
    #[arg(long)]
    pub apply: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = match cli.command {
        Command::Score(a) => commands::score(&a, argv),
        Command::Fit(a) => commands::fit(&a, argv),
        Command::Compare(a) => commands::compare(&a, argv),
        Command::Halfsample(a) => commands::halfsample(&a, argv),
        Command::Kappa(a) => commands::kappa(&a, argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
