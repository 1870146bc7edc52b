use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use cqed_cli::{CliError, EXIT_ASSERTION};

#[derive(Parser)]
#[command(name = "cqed", version, about = "Run cavity-QED simulation and verification scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its report
    Run {
        file: PathBuf,
        /// Output directory (created if missing)
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Print the fields of a scenario kind
    Describe { kind: String },
    /// List the scenario kinds
    List,
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { file, output } => {
            let report = cqed_cli::run(&file, &output).with_context(|| format!("running {}", file.display()))?;
            for a in &report.assertions {
                println!("[{}] {} (value {:e}, limit {:e})", if a.passed { "pass" } else { "FAIL" }, a.name, a.value, a.limit);
            }
            println!("report written to {}", output.join("report.json").display());
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_ASSERTION) })
        }
        Command::Describe { kind } => {
            print!("{}", cqed_cli::describe(&kind)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::List => {
            print!("{}", cqed_cli::list());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.downcast_ref::<CliError>().map_or(5, CliError::exit_code))
        }
    }
}
