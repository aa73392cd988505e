//! Command-line surface over `fraisse-core`: JSON and DOT I/O, age
//! descriptors and the subcommands.

pub mod commands;
pub mod descriptor;
pub mod dot;
pub mod wire;

use clap::Parser;
use serde_json::json;

pub use commands::{Cli, Output};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    /// Bad flags or malformed input; exit 1.
    #[error("input error: {0}")]
    Input(String),
    /// A bound or budget ran out before a definite answer; exit 2.
    #[error("bound exhausted: {0}")]
    Exhausted(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Exhausted(_) => 2,
        }
    }

    /// One-line JSON diagnostic for stderr.
    pub fn diagnostic(&self) -> String {
        let (kind, msg) = match self {
            CliError::Input(m) => ("input", m),
            CliError::Exhausted(m) => ("exhausted", m),
        };
        wire::emit(&json!({ "error": kind, "message": msg }))
    }
}

/// Full run: (exit code, stdout, stderr). Help and version exit 0.
pub fn run<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    (0, e.to_string(), String::new())
                }
                _ => {
                    let err = CliError::Input(e.to_string().trim_end().to_string());
                    (1, String::new(), err.diagnostic())
                }
            };
        }
    };
    match commands::dispatch(cli) {
        Ok(out) => (out.code, out.stdout, String::new()),
        Err(e) => (e.code(), String::new(), e.diagnostic()),
    }
}
