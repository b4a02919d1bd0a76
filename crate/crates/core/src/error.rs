use std::io;

use thiserror::Error;

use crate::treebank::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("sentence {index}: invalid tree: {report}")]
    InvalidTree {
        index: usize,
        report: ValidationReport,
    },

    #[error("model file line {line}: {message}")]
    Model { line: usize, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("gold/predicted mismatch in sentence {index}: {message}")]
    Mismatch { index: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
