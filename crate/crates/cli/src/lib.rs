//! Library surface of the command-line driver: configuration parsing,
//! output/manifest plumbing, and the per-subcommand pipelines. The binary in
//! `main.rs` is a thin argument-handling shell over these.

pub mod config;
pub mod manifest;
pub mod output;
pub mod pipelines;

use thiserror::Error;

/// CLI failure classes, mapped onto exit codes by the binary: configuration
/// problems exit 1, pipeline execution problems exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("pipeline failure: {0}")]
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Pipeline(_) => 2,
        }
    }
}

impl From<parasol_core::Error> for CliError {
    fn from(e: parasol_core::Error) -> Self {
        CliError::Pipeline(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Pipeline(format!("i/o: {e}"))
    }
}
