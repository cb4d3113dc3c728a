use std::process::ExitCode;

use anyhow::Context;
use stochastic_beer_cli::{parse_args, run, RunError, UsageError};

fn execute() -> anyhow::Result<String> {
    let config = parse_args(std::env::args_os())?;
    let outcome = run(&config).context("experiment failed")?;
    Ok(outcome.report)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(u) = e.downcast_ref::<UsageError>() {
        u.exit_code()
    } else if let Some(r) = e.downcast_ref::<RunError>() {
        r.exit_code()
    } else {
        1
    }
}

fn main() -> ExitCode {
    match execute() {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some_and(|u| u.informational) => {
            println!("{e}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
