//! Command-line front end for `mzi-core`.
//!
//! Every command writes a CSV table (header row, comma separated, numbers to
//! 12 significant digits) and prints a one-line summary on standard output.
//! Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or config
//! error.

pub mod arms;
pub mod config;
pub mod output;
pub mod run;

use thiserror::Error;

pub use config::{parse_config, parse_config_text, Command, RunConfig};
pub use run::run;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Clap(#[from] clap::Error),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Core(#[from] mzi_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// A self-check (oracle agreement, fit convergence) did not hold.
    #[error("numerical check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Clap(_) | CliError::Usage(_) => "usage",
            CliError::Core(e) => e.category(),
            CliError::Io(_) => "io",
            CliError::Csv(_) => "csv",
            CliError::Check(_) => "numerical",
        }
    }
}
