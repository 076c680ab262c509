//! Command-line front end: scenario parsing, verification runs, and JSON or
//! CSV reports.
//!
//! Exit codes are 0 when every assertion holds, 1 when one fails, and 2 for
//! unreadable or invalid input.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{execute, Cli, Outcome};
pub use error::{CliError, EXIT_ASSERTION, EXIT_INPUT, EXIT_OK};
pub use report::{Assertion, Report};
pub use scenario::ScenarioFile;

fn write_file(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    if let Some(path) = &cli.out {
        write_file(path, &outcome.report.to_json())?;
    }
    let summary = outcome.report.summary(cli.bits);
    match (&outcome.csv, csv_path(cli)) {
        (Some(csv), Some(path)) => {
            write_file(path, csv)?;
            print!("{summary}");
        }
        (Some(csv), None) => {
            print!("{csv}");
            eprint!("{summary}");
        }
        (None, _) => print!("{summary}"),
    }
    let _ = std::io::stdout().flush();
    Ok(())
}

fn csv_path(cli: &Cli) -> Option<&std::path::Path> {
    match &cli.command {
        commands::Command::Holevo(commands::HolevoCommand::Random(args)) => args.csv.as_deref(),
        _ => None,
    }
}

/// Parses arguments, runs the command, writes outputs, and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = emit(&cli, &outcome) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    if outcome.report.passed {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}
