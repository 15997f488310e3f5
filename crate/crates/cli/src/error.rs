//! CLI error type with process exit codes.

use gridgp::{ErrorCategory, GpError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Optimizer(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Machine-readable category tag printed alongside the message.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Numeric(_) => "numeric",
            CliError::Optimizer(_) => "optimizer",
        }
    }

    /// Exit codes: 0 ok, 2 input error, 3 numeric error, 4 optimizer failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Optimizer(_) => 4,
        }
    }
}

impl From<GpError> for CliError {
    fn from(e: GpError) -> Self {
        let msg = e.to_string();
        match e.category() {
            ErrorCategory::Input => CliError::Input(msg),
            ErrorCategory::Numeric => CliError::Numeric(msg),
            ErrorCategory::Optimizer => CliError::Optimizer(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
