//! `definetti`: command-line front end for the exact divergence and bound
//! computations in `definetti-core`.
//!
//! Exit status: 0 on success, 1 when a checked inequality fails, 2 on a
//! usage or input error.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] definetti_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(cli: &Cli) -> Result<bool, CliError> {
    let bits = cli.global.precision_bits;
    let format = cli.global.format;
    Ok(match &cli.command {
        Command::Sampling(a) => commands::sampling(a, bits, format)?.all_passed,
        Command::Definetti(a) => commands::definetti(a, bits, format)?.all_passed,
        Command::Verify(a) => commands::verify(a, bits, format)?.all_passed,
        Command::Sweep(a) => commands::sweep(a, bits, format)?.all_passed,
        Command::BoundsTable(a) => {
            commands::bounds_table(a, bits, format)?;
            true
        }
        Command::Registry => {
            commands::registry(format)?;
            true
        }
        Command::Model(a) => {
            commands::model(a)?;
            true
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
