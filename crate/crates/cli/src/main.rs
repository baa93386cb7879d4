// SPDX-License-Identifier: Apache-2.0

mod args;
mod output;
mod profile;
mod simulate;
mod tables;

use std::io;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A reproduced figure fell outside tolerance.
    Deviation,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_DEVIATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "unary-gemm",
    version,
    about = "Cycle-accurate unary GEMM simulator and cost model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one GEMM per (design, width) and report cycles and transitions.
    Simulate(simulate::SimulateArgs),
    /// Simulate a designs × widths × shapes grid with cost columns.
    Sweep(simulate::SweepArgs),
    /// Recompute the published energy and ADP tables and compare cell by cell.
    ReportTables(tables::TablesArgs),
    /// Word and bit sparsity of every layer in a tensor bundle.
    Profile(profile::ProfileArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<io::Error>() {
            return EXIT_IO;
        }
        if let Some(unary_gemm::Error::Io { .. }) = cause.downcast_ref::<unary_gemm::Error>() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            if e.is_io_error() {
                return EXIT_IO;
            }
        }
    }
    EXIT_VALIDATION
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate::simulate(a),
        Command::Sweep(a) => simulate::sweep(a),
        Command::ReportTables(a) => tables::report_tables(a),
        Command::Profile(a) => profile::profile(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Deviation) => ExitCode::from(EXIT_DEVIATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
