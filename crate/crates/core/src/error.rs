use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown FCA rule {0}")]
    UnknownRule(u32),

    #[error("invalid rule list {input:?}: {reason}")]
    RuleParse { input: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("fuzzy state value {value} at cell {cell} is outside [0, 1]")]
    StateOutOfRange { cell: usize, value: f64 },

    #[error("cannot encode an empty vector")]
    EmptyVector,

    #[error("cell count {cells} exceeds vector dimension {dim}")]
    TooManyCells { cells: usize, dim: usize },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("document {doc_id:?} is not a member of cluster {cluster}")]
    NotMember { doc_id: String, cluster: usize },

    #[error("document {doc_id:?} is already a member of cluster {cluster}")]
    AlreadyMember { doc_id: String, cluster: usize },

    #[error("no relevance judgments for query {0:?}")]
    MissingQrels(String),

    #[error("query {0:?} has no relevant documents")]
    NoRelevant(String),

    #[error("query sets differ: {0}")]
    QuerySetMismatch(String),

    #[error("infeasible synthetic corpus: {0}")]
    InfeasibleSpec(String),

    #[error("{path}:{line}: {reason}")]
    Format { path: String, line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl std::fmt::Display, line: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_string(),
            line,
            reason: reason.into(),
        }
    }
}
