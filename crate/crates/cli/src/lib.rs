//! Config-driven front end: `solve`, `verify`, `family`, `sweep`, `extend`, `report`.
//!
//! Exit codes: 0 success, 2 config or validation error, 3 solver failure,
//! 4 verification failure.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{
    cmd_extend, cmd_family, cmd_solve, cmd_sweep, cmd_verify, report, Outcome, RunOptions, EXIT_CONFIG, EXIT_OK,
    EXIT_SOLVER, EXIT_VERIFY,
};
pub use config::ProblemConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nlheat", version, about = "Semilinear heat equations with nonlocal initial conditions")]
pub struct Cli {
    /// Directory for CSV and JSON artifacts.
    #[arg(long, env = "NLHEAT_OUT_DIR", default_value = "nlheat-out", global = true)]
    pub out_dir: PathBuf,

    /// Overrides the sampling seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Solve { config: PathBuf },
    Verify { config: PathBuf },
    Family { config: PathBuf },
    Sweep { config: PathBuf },
    Extend {
        config: PathBuf,
        /// Number of periods; defaults to `verification.n_periods`.
        #[arg(long)]
        periods: Option<usize>,
    },
    /// Pretty-prints a JSON report.
    Report { report: PathBuf },
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let opts = RunOptions { out_dir: cli.out_dir, seed: cli.seed };
    let result = match &cli.command {
        Command::Solve { config } => cmd_solve(config, &opts),
        Command::Verify { config } => cmd_verify(config, &opts),
        Command::Family { config } => cmd_family(config, &opts),
        Command::Sweep { config } => cmd_sweep(config, &opts),
        Command::Extend { config, periods } => cmd_extend(config, *periods, &opts),
        Command::Report { report: path } => {
            return match report(path) {
                Ok(text) => {
                    print!("{text}");
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            };
        }
    };
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
