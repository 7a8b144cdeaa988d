//! The `appell` command line.
//!
//! Every subcommand prints one JSON document that starts with a
//! [`RunManifest`]. Exit codes: 0 on success or pass, 1 when a verification
//! fails, 2 on usage errors.

pub mod args;
mod commands;
pub mod manifest;

use std::ffi::OsString;
use std::io::Write;

use appell_sep::Error as CoreError;
use clap::{CommandFactory, Parser};

pub use args::Cli;
pub use manifest::RunManifest;

/// Directory for simulation artifacts when no explicit path is given.
pub const OUT_DIR_ENV: &str = "APPELL_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                CoreError::InvalidParameter(_)
                | CoreError::Parse(_)
                | CoreError::Arity { .. }
                | CoreError::DegenerateGeometry(_)
                | CoreError::NonInteger(_),
            ) => 2,
            _ => 1,
        }
    }
}

/// What a subcommand produced: the document to print and whether it passed.
pub struct Outcome {
    pub output: String,
    pub pass: bool,
}

/// Parses `argv`, runs the subcommand and writes to the given streams.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let path = commands::path(&cli.command);
    match commands::run(&cli.command) {
        Ok(out) => {
            let _ = stdout.write_all(out.output.as_bytes());
            if out.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let code = e.exit_code();
            let _ = writeln!(stderr, "error: {e}");
            if code == 2 {
                if let Some(help) = subcommand_help(&path) {
                    let _ = write!(stderr, "\n{help}");
                }
            }
            code
        }
    }
}

fn subcommand_help(path: &[&str]) -> Option<String> {
    let mut cmd = Cli::command();
    for name in path {
        cmd = cmd.find_subcommand(name)?.clone();
    }
    Some(cmd.render_help().to_string())
}
