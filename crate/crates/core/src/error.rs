use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An exact identity that must hold for a well-formed table did not.
    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    /// The requested point lies outside the region where the series is usable.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular chart: t3 must be nonzero")]
    SingularChart,

    #[error("malformed table file, line {line}: {reason}")]
    TableFormat { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
