use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stancecast::pipeline::{run_stage, PipelineConfig, Stage};
use stancecast::Error;

/// Runs one pipeline stage against a TOML configuration.
#[derive(Debug, Parser)]
#[command(name = "stancecast", version)]
struct Cli {
    /// Pipeline configuration file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Overrides the number of hyperparameter candidates per inner search.
    #[arg(long, global = true)]
    search_iters: Option<usize>,
    /// Keeps every instance of a user inside one outer fold.
    #[arg(long, global = true)]
    group_by_user: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the entry dump and reconstruct the thread forest.
    Ingest,
    /// Dataset statistics: monthly volume, roles, activity CCDF.
    Profile,
    /// Assign a stance to every active user in every period.
    Label,
    /// Extract the configured feature sets.
    Features,
    /// Nested cross-validation of every configured family and feature set.
    Evaluate,
    /// Generate a synthetic forum with planted stance dynamics.
    Synth,
    /// Print the evaluation summary and re-render its tables.
    Report,
}

impl Command {
    fn stage(&self) -> Stage {
        match self {
            Command::Ingest => Stage::Ingest,
            Command::Profile => Stage::Profile,
            Command::Label => Stage::Label,
            Command::Features => Stage::Features,
            Command::Evaluate => Stage::Evaluate,
            Command::Synth => Stage::Synth,
            Command::Report => Stage::Report,
        }
    }
}

fn load(cli: &Cli) -> Result<PipelineConfig, Error> {
    let mut config = match (&cli.config, cli.seed) {
        (Some(path), _) => PipelineConfig::load(path)?,
        (None, Some(seed)) => PipelineConfig::with_seed(seed),
        (None, None) => {
            return Err(Error::Config(
                "either --config or --seed is required".into(),
            ))
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(n) = cli.search_iters {
        config.learning.search_iters = n;
    }
    if cli.group_by_user {
        config.learning.group_by_user = true;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STANCECAST_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = load(&cli).and_then(|c| run_stage(cli.command.stage(), &c));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
