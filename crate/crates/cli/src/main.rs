//! `softlogic`: generate logic datasets, train adaptive-logit networks, and
//! inspect what they learned.

mod analyze;
mod apply;
mod config;
mod gen;
mod surface;
mod train;
mod verify;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "softlogic", version, about = "Adaptive logit-space activations for learned logic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random ground truth and sample train/val/test splits from it.
    Gen(gen::Args),
    /// Train one network per seed and record metrics and checkpoints.
    Train(train::Args),
    /// Report irrelevant antecedents and parameter sparsity of a checkpoint.
    Analyze(analyze::Args),
    /// Run the built-in verification checks.
    Verify(verify::Args),
    /// Sample a binary operation over a logit grid.
    Surface(surface::Args),
    /// Evaluate a stored ground truth on one input assignment.
    Apply(apply::Args),
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    Failed,
}

/// A bad flag or argument combination, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.downcast_ref::<UsageError>().is_some()
        || matches!(err.downcast_ref::<softlogic::Error>(), Some(softlogic::Error::InvalidArgument(_)));
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Train(a) => train::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Surface(a) => surface::run(a),
        Command::Apply(a) => apply::run(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
