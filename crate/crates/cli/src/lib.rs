//! Command-line front end for `anytime-core`. The binary is a thin wrapper
//! around [`run`].

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub mod args;
mod commands;
pub mod run_spec;

use args::{Cli, Command};
pub use run_spec::RunSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NONCONVERGED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] anytime_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(anytime_core::Error::Io(_))
            | CliError::Io(_)
            | CliError::File { .. } => EXIT_IO,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

fn dispatch(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::De(a) => commands::de(c, a),
        Command::Exponent(a) => commands::exponent(c, a),
        Command::Threshold(a) => commands::threshold_report(c, a),
        Command::Simulate(a) => commands::simulate(c, a),
        Command::Compare(a) => commands::compare(c, a),
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let outcome = match cli.common.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(cli))?,
        None => dispatch(cli)?,
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|source| CliError::File {
            path: path.clone(),
            source,
        })?,
        None => std::io::stdout()
            .lock()
            .write_all(outcome.text.as_bytes())?,
    }
    for note in &outcome.notes {
        eprintln!("{}: {note}", cli.command.name());
    }
    if !outcome.converged {
        eprintln!(
            "{}: density evolution did not converge everywhere; affected rows are flagged",
            cli.command.name()
        );
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
