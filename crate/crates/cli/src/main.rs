//! `superint`: catalog queries, verification suites, trajectories and
//! special-function tables from the command line.

mod config;
mod error;
mod json;
mod list;
mod merge;
mod specfun;
mod trajectory;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "superint", version, about = "Third-order integrals of separable Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the catalog
    List(list::ListArgs),
    /// Check the determining equations of catalog entries and write JSON reports
    Verify(verify::VerifyArgs),
    /// Integrate classical trajectories and monitor H and the integrals
    Trajectory(trajectory::TrajectoryArgs),
    /// Tabulate a Painlevé transcendent or Weierstrass function as CSV
    Specfun(specfun::SpecfunArgs),
    /// Combine verification reports into one file
    ReportMerge(merge::MergeArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_SCHEMA } else { error::EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = match &cli.command {
        Command::List(a) => list::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Trajectory(a) => trajectory::run(a),
        Command::Specfun(a) => specfun::run(a),
        Command::ReportMerge(a) => merge::run(a),
    };
    let code = match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
