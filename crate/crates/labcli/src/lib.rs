//! Scenario-driven front end: parse a config, run the
//! model -> evolve -> diagnose pipeline, emit machine-readable reports and
//! plot-ready data files.

pub mod config;
pub mod pipeline;
pub mod report;

use std::fmt;

use adlab_core::LabError;

/// CLI failures, split by exit code: validation problems exit 2,
/// numerical-guard refusals exit 3, I/O trouble exits 1.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Guard(LabError),
    Io(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid scenario: {msg}"),
            CliError::Guard(err) => write!(f, "numerical guard: {err}"),
            CliError::Io(msg) => write!(f, "i/o: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LabError> for CliError {
    fn from(err: LabError) -> Self {
        if err.is_numerical_guard() {
            CliError::Guard(err)
        } else {
            CliError::Validation(err.to_string())
        }
    }
}
