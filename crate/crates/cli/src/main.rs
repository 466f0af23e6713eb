mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{CliError, Outcome};

fn worker_count(flag: Option<u64>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        return Ok(w as usize);
    }
    match std::env::var("FIBAVG_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(CliError::Usage(format!("FIBAVG_WORKERS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

#[cfg(feature = "parallel")]
fn run_with_workers(workers: usize, cli: Cli) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(e.into()))?;
    pool.install(|| commands::run(cli))
}

#[cfg(not(feature = "parallel"))]
fn run_with_workers(_workers: usize, cli: Cli) -> Result<Outcome, CliError> {
    commands::run(cli)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = worker_count(cli.workers).and_then(|w| run_with_workers(w, cli));
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Ok(Outcome::Interrupted) => ExitCode::from(130),
        Err(e) => {
            eprintln!("fibavg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
