//! Config-driven front end: type verification of one surface, sweeps over
//! parallel families, and Cartan frame dumps.

pub mod commands;
pub mod config;
pub mod error;

use std::path::Path;

pub use commands::{run_solve_frame, run_sweep_parallel, run_verify};
pub use config::{Command, RunConfig};
pub use error::CliError;

/// Reads the config at `config` and runs `cmd`, returning the exit status.
pub fn run(cmd: Command, config: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::io(config, e))?;
    let cfg = RunConfig::parse(&text)?;
    match cmd {
        Command::Verify => run_verify(&cfg, out),
        Command::SweepParallel => run_sweep_parallel(&cfg, out),
        Command::SolveFrame => run_solve_frame(&cfg, out),
    }
}

/// Sizes the global thread pool from `ADSGAUSS_THREADS` when it is set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ADSGAUSS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "ADSGAUSS_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
