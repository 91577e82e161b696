use std::path::PathBuf;
use std::process::ExitCode;

use adsgauss_cli::{init_threads, run, Command};
use clap::{Args, Parser, Subcommand};

/// Gauss map type checks for Lorentzian hypersurfaces in anti-de Sitter space.
#[derive(Parser)]
#[command(name = "adsgauss", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Io {
    /// JSON run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Output file; defaults to the config's "output" or stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Classify the Gauss map of one surface and write a JSON report.
    Verify(Io),
    /// Classify the parallel family of a complex circle or B-scroll.
    SweepParallel(Io),
    /// Integrate a Cartan frame and dump it as CSV.
    SolveFrame(Io),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (cmd, io) = match cli.command {
        Sub::Verify(io) => (Command::Verify, io),
        Sub::SweepParallel(io) => (Command::SweepParallel, io),
        Sub::SolveFrame(io) => (Command::SolveFrame, io),
    };
    let status = init_threads().and_then(|_| run(cmd, &io.config, io.output.as_deref()));
    match status {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("adsgauss: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
