//! `covmet`: validate channels, scan precision bounds over N, cross-check against the
//! density-matrix oracle and dump master-equation rates.

mod crosscheck;
mod error;
mod model_args;
mod rates;
mod scan;
mod validate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "covmet", version, about = "Frequency-estimation precision limits under phase-covariant qubit noise")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "COVMET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check complete positivity of a channel or of a model at time t
    Validate(validate::ValidateArgs),
    /// Time-optimized bounds or GHZ precision over a grid of N, as CSV
    Scan(scan::ScanArgs),
    /// Compare formulas and bounds with the density-matrix oracle for small N
    Crosscheck(crosscheck::CrosscheckArgs),
    /// Master-equation rates recovered from a model trajectory, as CSV
    Rates(rates::RatesArgs),
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Validate(a) => validate::run(&a),
        Command::Scan(a) => scan::run(&scan::ScanConfig::from_args(&a)?).map(|_| true),
        Command::Crosscheck(a) => crosscheck::run(&a),
        Command::Rates(a) => rates::run(&a).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
