use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt stream: {0}")]
    CorruptStream(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameter for {corruption}: {detail}")]
    InvalidParameter { corruption: String, detail: String },

    #[error("unknown corruption `{0}`")]
    UnknownCorruption(String),

    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("{path}: missing header (expected {expected})")]
    MissingHeader { path: String, expected: String },

    #[error("{path}: duplicate id `{id}`")]
    DuplicateId { path: String, id: String },

    #[error("missing {what}: {}", ids.join(", "))]
    Missing { what: String, ids: Vec<String> },

    #[error("unmapped label(s): {0}")]
    UnmappedLabel(String),

    #[error("no data: {0}")]
    NoData(String),

    #[error("zero area under {0} curve")]
    ZeroArea(&'static str),

    #[error("mismatch: {0}")]
    Mismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl std::fmt::Display, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            detail: detail.into(),
        }
    }
}
