//! `aad` command-line tool.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or validation
//! errors. Every successful run writes `manifest.json` next to its outputs.
//! `AAD_THREADS` caps the worker pool; results do not depend on it.

mod commands;
pub mod config;
mod error;
pub mod layout;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "aad", version, about = "Auditory attention decoding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract a stimulus envelope or clean a multichannel recording.
    Preprocess(PreprocessArgs),
    /// Fit a backward decoder on a training corpus.
    Train(TrainArgs),
    /// Classify attended streams of test trials with a trained decoder.
    Decode(DecodeArgs),
    /// Generate a synthetic corpus and run the full decoding experiment.
    Simulate(SimulateArgs),
    /// Matrix-sentence behavioral sessions.
    #[command(subcommand)]
    Behavioral(BehavioralCommand),
    /// Statistical tests.
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignalKind {
    /// Single-channel audio turned into a normalized envelope.
    Stimulus,
    /// Multichannel neural recording.
    Recording,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: SignalKind,
    /// Output sampling rate in Hz.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    low_hz: Option<f64>,
    #[arg(long)]
    high_hz: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory of trial_* subdirectories with recording and envelope files.
    #[arg(long)]
    corpus: PathBuf,
    /// `default` or a comma-separated list of lambda values.
    #[arg(long)]
    grid: Option<String>,
    /// Fixed lambda; skips cross-validation.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau_min_ms: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau_max_ms: Option<f64>,
    /// Expected sampling rate of the corpus.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, value_enum)]
    final_fit: Option<FinalFitArg>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FinalFitArg {
    Joint,
    Average,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    decoder: PathBuf,
    /// Directory of trial_* subdirectories with recording, target, masker1
    /// and masker2 files.
    #[arg(long)]
    trials: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    /// Per-channel SNR in dB; `-inf` for noise only.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    leakage: Option<f64>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    train_trials: Option<usize>,
    #[arg(long)]
    test_trials: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tau_min_ms: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau_max_ms: Option<f64>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum BehavioralCommand {
    /// Plan one shuffled session per level.
    Gen(BehavioralGenArgs),
    /// Score responses against a session plan.
    Score(BehavioralScoreArgs),
}

#[derive(Debug, Args)]
struct BehavioralGenArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated target levels in dB SPL.
    #[arg(long)]
    levels: Option<String>,
    /// Target-to-masker ratio in dB.
    #[arg(long, allow_hyphen_values = true)]
    tmr_db: Option<f64>,
    /// Repetitions per layout.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BehavioralScoreArgs {
    /// `sessions.json` written by `behavioral gen`.
    #[arg(long)]
    sessions: PathBuf,
    /// JSON array of `{"session", "trial", "words"}` objects.
    #[arg(long)]
    responses: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum StatsCommand {
    /// One-way ANOVA with Bonferroni-adjusted pairwise t tests.
    Anova(AnovaArgs),
}

#[derive(Debug, Args)]
struct AnovaArgs {
    /// One CSV file per group; every numeric field is an observation.
    #[arg(long, num_args = 2.., required = true)]
    groups: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pairwise: Option<PairwiseArg>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairwiseArg {
    /// Pooled variance of each compared pair.
    Pooled,
    /// Within-group mean square of the full ANOVA.
    Msw,
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("AAD_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("AAD_THREADS must be a positive integer, got '{value}'")))?;
    // a pool that already exists (repeated in-process runs) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Train(a) => commands::train(a),
        Command::Decode(a) => commands::decode(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Behavioral(BehavioralCommand::Gen(a)) => commands::behavioral_gen(a),
        Command::Behavioral(BehavioralCommand::Score(a)) => commands::behavioral_score(a),
        Command::Stats(StatsCommand::Anova(a)) => commands::anova(a),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
