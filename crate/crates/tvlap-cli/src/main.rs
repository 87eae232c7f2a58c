//! Command-line front end for the trend-estimation toolkit.
//!
//! Subcommands: `simulate`, `filter`, `forecast`, `compare`, `diagnose`,
//! `check`. Exit codes: 0 on success, 1 on analytic failure (e.g. a
//! system check that does not pass), 2 on usage or configuration errors.

mod commands;
mod config;
mod csvio;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tvlap",
    version,
    about = "Online trend estimation, extrema detection, forecasting, and sensor fault diagnosis for scalar time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark scenario as CSV
    Simulate(commands::simulate::SimulateArgs),
    /// Run the trend filter over a CSV time series
    Filter(commands::filter::FilterArgs),
    /// Filter a series, then forecast past its end
    Forecast(commands::forecast::ForecastArgs),
    /// Compare trend models on the benchmark scenario
    Compare(commands::compare::CompareArgs),
    /// Flag channels whose derivative variance stands out
    Diagnose(commands::diagnose::DiagnoseArgs),
    /// Report observability/controllability of a model configuration
    Check(commands::check::CheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Filter(args) => commands::filter::run(args),
        Command::Forecast(args) => commands::forecast::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::Diagnose(args) => commands::diagnose::run(args),
        Command::Check(args) => commands::check::run(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
