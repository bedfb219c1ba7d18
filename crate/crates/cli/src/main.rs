mod args;
mod config;
mod error;
mod exclude;
mod predict;
mod provenance;
mod simulate;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, PredictCommand};
use error::CliResult;

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => {
            let dir = simulate::run(&a)?;
            println!("wrote simulation outputs to {}", dir.display());
        }
        Command::Predict(PredictCommand::Contrast(a)) => println!("{}", predict::contrast(&a)?),
        Command::Predict(PredictCommand::Heating(a)) => println!("{}", predict::heating(&a)?),
        Command::Exclude(a) => {
            let dir = exclude::run(&a)?;
            println!("wrote exclusion outputs to {}", dir.display());
        }
        Command::Verify(a) => println!("{}", provenance::verify(&a.dir)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
