use std::process::ExitCode;

use clap::Parser;
use curvecomplex_cli::{emit, run, Cli, RunConfig};

fn main() -> ExitCode {
    let result = RunConfig::from_cli(Cli::parse()).and_then(|cfg| {
        let outcome = run(&cfg)?;
        emit(&cfg, &outcome)?;
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
