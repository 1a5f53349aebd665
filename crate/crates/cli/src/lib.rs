//! Command-line plumbing for the exploration simulator: run configuration
//! files and the `scene-gen`, `oracle-dump`, `explore` and `evaluate`
//! commands.

pub mod commands;
pub mod config;

pub use config::RunConfig;

use frontier_core::eval::EvalError;
use frontier_core::world::WorldError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    /// Input files exist but their contents are unusable.
    #[error("invalid input: {0}")]
    Input(String),
    /// The run finished abnormally; partial output was written.
    #[error("run failed: {0}")]
    RunFailure(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Input(_) => 3,
            CliError::RunFailure(_) => 4,
            CliError::Output { .. } => 1,
        }
    }
}

impl From<WorldError> for CliError {
    fn from(e: WorldError) -> Self {
        match e {
            WorldError::InvalidParams(_) | WorldError::InvalidCamera(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::World(w) => w.into(),
            EvalError::InvalidSuite(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
