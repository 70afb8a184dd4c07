//! Library side of the `birthflow` command-line tool.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use birthflow_core::metrics::TableErrors;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] birthflow_core::Error),
    #[error(transparent)]
    Table(#[from] TableErrors),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What a subcommand produced: the payload for `--out`/stdout, notes for
/// stderr and whether the run counts as a success.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub body: String,
    pub notes: Vec<String>,
    pub success: bool,
}

impl Report {
    pub fn ok(body: String) -> Self {
        Self {
            body,
            notes: Vec::new(),
            success: true,
        }
    }
}
