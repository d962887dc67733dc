//! Library side of the `ttns` command: report assembly and the subcommand
//! implementations, kept separate from argument parsing so they can be
//! driven from tests.

pub mod commands;
pub mod json;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ttns::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
