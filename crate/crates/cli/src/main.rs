//! `prompt-matcher` command-line tool.
//!
//! Exit codes: 0 success, 1 invalid input or domain error, 2 file I/O or
//! parse failure, 3 oracle failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use prompt_matcher::engine::ErrorPolicy;
use prompt_matcher::oracle::Template;
use prompt_matcher::selection::Strategy;
use prompt_matcher::Error;

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "prompt-matcher", version, about = "Budgeted verification of uncertain schema matches")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, env = "PROMPT_MATCHER_CONFIG")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, env = "PROMPT_MATCHER_SEED")]
    pub seed: Option<u64>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, env = "PROMPT_MATCHER_LOG")]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a candidate result set file.
    Validate {
        crs: PathBuf,
    },
    /// Generate a candidate result set.
    Demo(DemoArgs),
    /// Choose correspondences for one budget without asking anything.
    Select(SelectArgs),
    /// Run the full select / verify / update loop.
    Run(RunArgs),
    /// Score a run report, or run an experiment grid.
    Eval(EvalArgs),
    /// Time selection strategies over a budget grid; prints CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Source schema JSON; defaults to the built-in Employee schema.
    #[arg(long, requires = "target")]
    pub source: Option<PathBuf>,
    #[arg(long, requires = "source")]
    pub target: Option<PathBuf>,
    /// Generate a synthetic set with known ground truth instead.
    #[arg(long, conflicts_with_all = ["source", "target"])]
    pub synthetic: bool,
    /// Where to write the ground truth of a synthetic set.
    #[arg(long, requires = "synthetic")]
    pub truth_out: Option<PathBuf>,
    /// Output path; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PlanArgs {
    /// Token budget.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub strategy: Option<StrategyArg>,
    /// Assumed oracle accuracy while planning, in (0.5, 1].
    #[arg(long)]
    pub planning_accuracy: Option<f64>,
    /// Largest exact evaluation, as a power of two of answer classes.
    #[arg(long)]
    pub exact_cap: Option<u32>,
    /// Monte Carlo samples used beyond the cap.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Characters per token for estimated costs.
    #[arg(long)]
    pub chars_per_token: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    pub crs: PathBuf,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Also write the selection as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub crs: PathBuf,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Number of rounds.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Stop once entropy (nats) is at or below this value.
    #[arg(long)]
    pub stop_entropy: Option<f64>,
    /// Allow asking the same correspondence again.
    #[arg(long)]
    pub allow_requery: bool,
    #[arg(long)]
    pub error_policy: Option<PolicyArg>,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Write the run report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one JSON line per query here.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct OracleArgs {
    /// Oracle backend; overrides the config file's `oracle` entry.
    #[arg(long)]
    pub oracle: Option<OracleKind>,
    /// Ground truth for the simulated oracle.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Accuracy of the simulated oracle.
    #[arg(long, default_value_t = prompt_matcher::oracle::DEFAULT_SIMULATED_ACCURACY)]
    pub oracle_accuracy: f64,
    /// Transcript to replay.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Chat completions endpoint for the LLM oracle.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value = "semantic")]
    pub template: TemplateArg,
    /// Directory for cached LLM answers.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Append every LLM answer to this transcript.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Use this confidence instead of the model's own.
    #[arg(long)]
    pub fixed_confidence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Run report to score.
    #[arg(required_unless_present = "experiment", conflicts_with = "experiment")]
    pub report: Option<PathBuf>,
    /// Candidate result set the report was produced from.
    #[arg(long, required_unless_present = "experiment")]
    pub crs: Option<PathBuf>,
    /// Ground truth file.
    #[arg(long, required_unless_present = "experiment")]
    pub truth: Option<PathBuf>,
    /// Experiment spec JSON; dataset paths are relative to it.
    #[arg(long)]
    pub experiment: Option<PathBuf>,
    /// Per-cell CSV output for an experiment.
    #[arg(long, requires = "experiment")]
    pub csv: Option<PathBuf>,
    /// Entropy curve CSV output for an experiment.
    #[arg(long, requires = "experiment")]
    pub curves: Option<PathBuf>,
    /// Full experiment report as JSON.
    #[arg(long, requires = "experiment")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark this set instead of a generated one.
    #[arg(long)]
    pub crs: Option<PathBuf>,
    /// Correspondences in the generated instance.
    #[arg(long, default_value_t = 20)]
    pub correspondences: usize,
    /// Views in the generated instance.
    #[arg(long, default_value_t = 5)]
    pub views: usize,
    /// Uniform cost per correspondence in the generated instance.
    #[arg(long, default_value_t = 15)]
    pub cost: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [120u64, 150, 180, 210])]
    pub budgets: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values = ["greedy", "brute"])]
    pub strategies: Vec<StrategyArg>,
    #[arg(long, default_value_t = 0.9)]
    pub planning_accuracy: f64,
    /// Write the CSV here as well as to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Greedy,
    Random,
    Brute,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Random => Strategy::Random,
            StrategyArg::Brute => Strategy::Brute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Abort,
    Skip,
}

impl From<PolicyArg> for ErrorPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Abort => ErrorPolicy::Abort,
            PolicyArg::Skip => ErrorPolicy::Skip,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Simulated,
    Replay,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum TemplateArg {
    #[default]
    Semantic,
    Abbreviation,
}

impl From<TemplateArg> for Template {
    fn from(t: TemplateArg) -> Self {
        match t {
            TemplateArg::Semantic => Template::Semantic,
            TemplateArg::Abbreviation => Template::Abbreviation,
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_oracle_failure() {
        3
    } else if e.is_io() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e));
            }
        },
        None => FileConfig::default(),
    };
    let level = cli
        .log_level
        .clone()
        .or_else(|| file.log_level.clone())
        .unwrap_or_else(|| "warn".into());
    env_logger::Builder::new()
        .parse_filters(&level)
        .format_timestamp(None)
        .init();

    match commands::dispatch(&cli, &file) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
