//! `inforate`: scenario-driven runner for the information-based rate model.
//!
//! Exit codes: 0 success, 2 scenario error, 3 numeric failure, 4 a
//! diagnostic check failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod format;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "inforate", version, about = "Information-based interest-rate model runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Significant digits in CSV output (default 12).
    #[arg(long)]
    precision: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Initial discount, forward rate and density on a grid.
    Curve(Common),
    /// Sample paths of the information process and bond prices.
    Simulate(Common),
    /// Bonds, bond calls, swaptions and implied information rates.
    Price(Common),
    /// Martingale, measure-change and innovations checks.
    Diagnose(Common),
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let (common, which) = match cli.command {
        Command::Curve(c) => (c, 0),
        Command::Simulate(c) => (c, 1),
        Command::Price(c) => (c, 2),
        Command::Diagnose(c) => (c, 3),
    };
    let scenario = Scenario::load(&common.scenario)?;
    let ctx = Context::new(scenario, common.seed, common.out, common.precision)?;
    match which {
        0 => commands::curve(&ctx).map(|s| (s, true)),
        1 => commands::simulate(&ctx).map(|s| (s, true)),
        2 => commands::price(&ctx).map(|s| (s, true)),
        _ => commands::diagnose(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok((summary, true)) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Ok((summary, false)) => {
            println!("{summary}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("inforate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
