use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::FileConfig;

/// Text difficulty scoring, difficulty splits, and HLM index reports.
#[derive(Debug, Parser)]
#[command(name = "hlmkit", version)]
struct Cli {
    /// TOML config file. Flags given on the command line take precedence.
    #[arg(long, global = true, env = "HLMKIT_CONFIG")]
    config: Option<PathBuf>,

    /// Re-read every written file and check it against its schema.
    #[arg(long, global = true)]
    validate: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every document of a corpus under one criterion.
    Score(commands::ScoreArgs),
    /// Cut a scored corpus into easy, medium and hard thirds.
    Split(commands::SplitArgs),
    /// Train a Kneser-Ney n-gram model on a corpus.
    LmTrain(commands::LmTrainArgs),
    /// Write per-token surprisals for a corpus.
    Surprisal(commands::SurprisalArgs),
    /// Compute HLM cell values and indices from a performance table.
    Hlm(commands::HlmArgs),
    /// Turn a split into a training order.
    Schedule(commands::ScheduleArgs),
    /// Convergence ratios for the runs listed in a manifest.
    Converge(commands::ConvergeArgs),
    /// Rank-based difficulty transfer scores from a performance table.
    Transfer(commands::TransferArgs),
    /// Render heatmap and learning-curve SVGs plus a markdown summary.
    Report(commands::ReportArgs),
}

/// Shared by every subcommand that writes a single file.
#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file.
    #[arg(short, long)]
    pub out: PathBuf,
}

pub struct Ctx {
    pub file: FileConfig,
    pub validate: bool,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<hlmkit::Error>() {
        Some(e) if e.is_io() => 3,
        Some(_) => 2,
        None if err.downcast_ref::<std::io::Error>().is_some() => 3,
        None => 2,
    }
}

/// Context chain down to the first library error, whose `Display` already
/// includes its own source.
fn message(err: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in err.chain() {
        parts.push(cause.to_string());
        if cause.is::<hlmkit::Error>() {
            break;
        }
    }
    parts.join(": ")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let ctx = Ctx {
        file,
        validate: cli.validate,
    };
    match cli.command {
        Command::Score(a) => commands::score(&ctx, a),
        Command::Split(a) => commands::split(&ctx, a),
        Command::LmTrain(a) => commands::lm_train(&ctx, a),
        Command::Surprisal(a) => commands::surprisal(&ctx, a),
        Command::Hlm(a) => commands::hlm(&ctx, a),
        Command::Schedule(a) => commands::schedule(&ctx, a),
        Command::Converge(a) => commands::converge(&ctx, a),
        Command::Transfer(a) => commands::transfer(&ctx, a),
        Command::Report(a) => commands::report(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", message(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
