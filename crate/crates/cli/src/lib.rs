//! Command-line front end: parses flags or a JSON config, dispatches engine
//! runs and writes CSV tables with `.meta.json` run records.

use std::path::PathBuf;

pub mod config;
pub mod output;
pub mod run;

pub use config::{Command, RunConfig};
pub use output::RunRecord;
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Engine(#[from] qpulse_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("selftest failed: {0}")]
    SelfTest(String),
}

impl CliError {
    /// 1 for configuration errors, 2 for engine, domain and output errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Engine(e) if e.is_configuration() => 1,
            _ => 2,
        }
    }
}
