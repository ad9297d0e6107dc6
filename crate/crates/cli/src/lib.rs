//! Command-line driver for `jetmech`: job configs, the four commands, the
//! built-in example corpus, and report rendering.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod report;

pub use commands::{derive, hj_check, hj_solve_affine, simulate, Outcome, RunOptions};
pub use config::JobConfig;

/// An error with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    /// Usage or config error, exit code 2.
    pub fn config(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }
}

impl From<jetmech::Error> for CliError {
    fn from(e: jetmech::Error) -> Self {
        CliError {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}
