use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("record `{id}`: expected {expected} tokens, found {actual}")]
    LengthMismatch {
        id: String,
        expected: usize,
        actual: usize,
    },
    #[error("record `{id}`: dup_count must be >= 1")]
    InvalidDupCount { id: String },
    #[error("record `{id}` has no dup_count")]
    MissingDupCount { id: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("degenerate point cloud: {remaining} distinct rows remain, at least 3 required")]
    DegenerateCloud { remaining: usize },
    #[error("point cloud contains coincident points (zero neighbor distance)")]
    CoincidentPoints,
    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("point-cloud framing: {0}")]
    Framing(String),
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("audit aborted: {failed} of {total} sequences failed (limit {limit:.0}%)")]
    AuditAborted {
        failed: usize,
        total: usize,
        limit: f64,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.to_string(),
        }
    }
}
