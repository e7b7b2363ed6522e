use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seeds are capped so reports can carry them as TOML integers.
pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Parser)]
#[command(name = "chansel", version, about = "Wrapper-based EEG channel selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic trial set with planted informative channels.
    Synth(SynthArgs),
    /// Convert a CSV trial table into an ETS file.
    Convert(ConvertArgs),
    /// Run a channel-selection method and write a report.
    Select(SelectArgs),
    /// Evaluate a single channel subset.
    Eval(EvalArgs),
    /// Count EEGNet parameters for a given geometry.
    Params(ParamsArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 22)]
    pub channels: usize,
    #[arg(long, default_value_t = 1125)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    /// Comma-separated 0-based indices of informative channels.
    #[arg(long, default_value = "7,9,11")]
    pub informative: String,
    #[arg(long, default_value_t = 6.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 250.0)]
    pub fs: f64,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub fs: f64,
    /// Comma-separated channel names, in row order.
    #[arg(long)]
    pub names: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvaluatorKind {
    Builtin,
    Oracle,
    External,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluatorArgs {
    #[arg(long, value_enum, default_value_t = EvaluatorKind::Builtin)]
    pub evaluator: EvaluatorKind,
    /// Evaluation seed (fold assignment, external requests).
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
    pub seed: u64,

    #[arg(long, default_value_t = 5, help_heading = "Built-in evaluator")]
    pub folds: usize,
    #[arg(long, default_value_t = 0.1, help_heading = "Built-in evaluator")]
    pub gamma: f64,
    /// Frequency bands as LOW-HIGH pairs in Hz, comma-separated.
    #[arg(long, default_value = "4-8,8-13,13-30", help_heading = "Built-in evaluator")]
    pub bands: String,
    /// Fail instead of falling back to log-variance when bands exceed Nyquist.
    #[arg(long, help_heading = "Built-in evaluator")]
    pub no_broadband_fallback: bool,

    /// Informative channel indices for the oracle.
    #[arg(long, default_value = "0", help_heading = "Oracle evaluator")]
    pub oracle_informative: String,
    #[arg(long, default_value_t = 0.5, help_heading = "Oracle evaluator")]
    pub oracle_base: f64,
    #[arg(long, default_value_t = 0.1, help_heading = "Oracle evaluator")]
    pub oracle_gain: f64,
    #[arg(long, default_value_t = 0.01, help_heading = "Oracle evaluator")]
    pub oracle_penalty: f64,

    /// Evaluator program speaking the chansel-eval protocol.
    #[arg(long, help_heading = "External evaluator")]
    pub external: Option<String>,
    /// Argument passed to the external program (repeatable).
    #[arg(long = "external-arg", allow_hyphen_values = true, help_heading = "External evaluator")]
    pub external_args: Vec<String>,
    /// Seconds to wait for each external reply.
    #[arg(long, default_value_t = 600.0, help_heading = "External evaluator")]
    pub timeout_s: f64,
    /// Maximum concurrent external processes (default: --jobs).
    #[arg(long, help_heading = "External evaluator")]
    pub pool: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exhaustive,
    Greedy,
    Random,
    Task,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreModeArg {
    RawSum,
    OccurrenceMean,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub eval: EvaluatorArgs,
    /// Parallel evaluations (default: number of cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Report file (TOML).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accuracy-curve CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,

    /// Lift the exhaustive-search channel guard.
    #[arg(long, help_heading = "Exhaustive")]
    pub allow_large: bool,
    #[arg(long, default_value_t = 20, help_heading = "Exhaustive")]
    pub max_channels: usize,

    /// Number of random subsets.
    #[arg(long, help_heading = "Weighted random")]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.5, help_heading = "Weighted random")]
    pub p_include: f64,
    /// Seed for subset sampling (default: --seed).
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=MAX_SEED), help_heading = "Weighted random")]
    pub sample_seed: Option<u64>,
    /// Channels to keep after ranking.
    #[arg(long, default_value_t = 14, help_heading = "Weighted random")]
    pub target_size: usize,
    /// Report the ranking only, without forming a final subset.
    #[arg(long, help_heading = "Weighted random")]
    pub no_target: bool,
    #[arg(long, value_enum, default_value_t = ScoreModeArg::RawSum, help_heading = "Weighted random")]
    pub score_mode: ScoreModeArg,

    /// 10-20 row prefixes, comma-separated.
    #[arg(long, default_value = "FC,C,CP", help_heading = "Task region")]
    pub prefixes: String,
    /// Explicit channel names, comma-separated; overrides --prefixes.
    #[arg(long, help_heading = "Task region")]
    pub names: Option<String>,
    /// Evaluate the region subset.
    #[arg(long, help_heading = "Task region")]
    pub evaluate: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// "all", or comma-separated indices or channel names.
    #[arg(long, default_value = "all")]
    pub channels: String,
    #[command(flatten)]
    pub eval: EvaluatorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountModeArg {
    TrainableOnly,
    AllBatchnorm,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[arg(long, default_value_t = 22)]
    pub c: u64,
    #[arg(long, default_value_t = 1125)]
    pub t: u64,
    #[arg(long, default_value_t = 8)]
    pub f1: u64,
    #[arg(long, default_value_t = 2)]
    pub d: u64,
    #[arg(long, default_value_t = 16)]
    pub f2: u64,
    #[arg(long, default_value_t = 64)]
    pub kern_len: u64,
    #[arg(long, default_value_t = 16)]
    pub sep_kern: u64,
    #[arg(long, default_value_t = 4)]
    pub pool1: u64,
    #[arg(long, default_value_t = 8)]
    pub pool2: u64,
    #[arg(long, default_value_t = 4)]
    pub classes: u64,
    #[arg(long, value_enum, default_value_t = CountModeArg::TrainableOnly)]
    pub count_mode: CountModeArg,
}
