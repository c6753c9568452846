mod cmd;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use idlex_core::ErrorKind;

use crate::cmd::Ctx;
use crate::config::{FileConfig, Settings};

/// Identity-term annotation, counterfactual augmentation and fairness metrics.
#[derive(Debug, Parser)]
#[command(name = "idlex", version)]
struct Cli {
    /// TOML file with defaults for any command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; the number of CPUs by default.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find identity-term mentions in documents.
    Annotate(cmd::annotate::Args),
    /// Score annotations against gold document labels.
    Eval(cmd::eval::Args),
    /// Inter-annotator agreement.
    Iar(cmd::iar::Args),
    /// Ablated or term-replaced variants of labeled examples.
    Counterfactual(cmd::counterfactual::Args),
    /// Balance per-subgroup toxic rates with sourced and generated examples.
    Debias(cmd::debias::Args),
    /// Fill templates with lexicon terms.
    Templates(cmd::templates::Args),
    /// Lexicon counts, compared with reference figures.
    Stats(cmd::stats::Args),
    /// Counterfactual flip rates of base and treated models.
    Flips(cmd::flips::Args),
    /// Seeded train/test split.
    Split(cmd::split::Args),
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let workers = cli
        .workers
        .or(file.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let settings = Settings {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        workers,
    };
    let ctx = Ctx { file, settings };
    match &cli.command {
        Command::Annotate(a) => cmd::annotate::run(&ctx, a),
        Command::Eval(a) => cmd::eval::run(&ctx, a),
        Command::Iar(a) => cmd::iar::run(&ctx, a),
        Command::Counterfactual(a) => cmd::counterfactual::run(&ctx, a),
        Command::Debias(a) => cmd::debias::run(&ctx, a),
        Command::Templates(a) => cmd::templates::run(&ctx, a),
        Command::Stats(a) => cmd::stats::run(&ctx, a),
        Command::Flips(a) => cmd::flips::run(&ctx, a),
        Command::Split(a) => cmd::split::run(&ctx, a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<idlex_core::Error>())
        .map(idlex_core::Error::kind);
    match kind {
        Some(ErrorKind::Contract) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
