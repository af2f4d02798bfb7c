use std::process::ExitCode;

use clap::Parser;

use codegraph_cli::{emit, run, Cli, RunConfig, Status};

fn main() -> ExitCode {
    let config = match RunConfig::from_cli(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::Invalid.code() as u8);
        }
    };
    let status = match run(&config) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome, config.out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(Status::Invalid.code() as u8);
            }
            outcome.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            Status::of_error(&e)
        }
    };
    ExitCode::from(status.code() as u8)
}
