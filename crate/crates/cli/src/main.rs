//! `arpsim` command-line front end.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 invalid flags or
//! inputs, 3 integrator failure, 4 not enough ridge points to fit.

mod args;
mod commands;
mod error;
mod output;
mod plot;

use clap::Parser;

use args::{expand_config, Cli, Command};
use error::CliError;

fn run() -> Result<(), CliError> {
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::RidgeFit(a) => commands::ridge_fit(a),
        Command::Model(a) => commands::model(a),
        Command::Family(a) => commands::family(a),
        Command::Plot(a) => plot::plot(a),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
