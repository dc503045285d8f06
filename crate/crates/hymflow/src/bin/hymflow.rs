//! Scenario runner CLI.
//!
//! Exit codes: 0 = reconciliation PASS, 2 = reconciliation FAIL,
//! 1 = configuration or execution error.

use clap::{Parser, Subcommand};
use hymflow::scenario::{run_scenario, run_suite, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hymflow", about = "Donaldson heat flow lab for lattice Higgs bundles", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print per-step progress and summaries.
    #[arg(long, global = true)]
    verbose: bool,
    /// Override flow.max_steps from the command line.
    #[arg(long, global = true, value_name = "INT")]
    max_steps_override: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario config.
    Run { config: PathBuf },
    /// Run every *.json scenario in a directory and print a PASS/FAIL table.
    Suite { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        verbose: cli.verbose,
        max_steps: cli.max_steps_override,
        output_dir: None,
    };
    match cli.command {
        Command::Run { config } => match run_scenario(&config, &overrides) {
            Ok(outcome) => {
                println!(
                    "{}  {} ({:?}, {:?})",
                    if outcome.pass { "PASS" } else { "FAIL" },
                    outcome.report.example,
                    outcome.report.flow.status,
                    outcome.report.classification,
                );
                if outcome.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Suite { dir } => match run_suite(&dir, &overrides) {
            Ok(summary) => {
                print!("{}", summary.table());
                ExitCode::from(summary.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
