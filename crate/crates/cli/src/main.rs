//! `negscope` command-line entry point.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunConfig, RunFlags};

#[derive(Parser)]
#[command(
    name = "negscope",
    version,
    about = "Negation structure detection and evaluation for transcribed speech"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: RunFlags,
}

#[derive(Subcommand)]
enum Command {
    /// Parse headers, strip disfluency markers and segment utterances.
    Ingest {
        /// Print each document as one JSON line on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Tag, match and label negation structures.
    Classify,
    /// Inter-annotator agreement for an annotation CSV.
    Agree,
    /// Score predicted labels against gold labels.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::resolve(&cli.flags).and_then(|cfg| match &cli.command {
        Command::Ingest { json } => commands::ingest(&cfg, *json),
        Command::Classify => commands::classify(&cfg),
        Command::Agree => commands::agree(&cfg),
        Command::Eval { gold, predicted } => commands::eval(&cfg, gold, predicted),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
