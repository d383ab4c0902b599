//! `positronium`: energy curves, minima, radius tuning, flux solutions and
//! variational bounds for electron-positron ring models.
//!
//! Exit codes: 0 success, 1 acceptance failure (`reproduce`),
//! 2 invalid usage, 3 numerical failure.

mod commands;
mod output;
mod params;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Status};
use params::Params;

#[derive(Parser)]
#[command(name = "positronium", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a potential on a grid (CSV `r,V` by default)
    Scan(Params),
    /// List all local minima of a potential in a range
    Minimize(Params),
    /// Tune the ring radius (and kappa for BLTP) to a target ground-state energy
    Tune(Params),
    /// Solve the flux-quantization constraint for R at fixed kappa
    FluxSolve(Params),
    /// Variational upper bound over the exponential trial family
    Variational(Params),
    /// Run every acceptance check and print a pass/fail table
    Reproduce(Params),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, params): (fn(&Params) -> commands::Outcome, Params) = match cli.command {
        Command::Scan(p) => (commands::scan, p),
        Command::Minimize(p) => (commands::minimize, p),
        Command::Tune(p) => (commands::tune, p),
        Command::FluxSolve(p) => (commands::flux_solve, p),
        Command::Variational(p) => (commands::variational, p),
        Command::Reproduce(p) => (commands::reproduce, p),
    };
    let outcome = params
        .merge_config_file()
        .map_err(Failure::from)
        .and_then(|p| run(&p));
    match outcome {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::AcceptanceFailed) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
