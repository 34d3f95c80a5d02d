use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes. Each maps onto one process exit code and one
/// HTTP status so that CLI, server and client agree on semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Io,
    Resolution,
    Validation,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 2,
            ErrorKind::Resolution => 3,
            ErrorKind::Validation => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("row {row}: {message}")]
    Record { row: u64, message: String },
    #[error("unresolved entities: {}", .missing.join(", "))]
    Unresolved {
        missing: Vec<String>,
        suggestions: Vec<String>,
    },
    #[error("entity id {id} out of range (node count {node_count})")]
    OutOfRange { id: u32, node_count: usize },
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
    #[error("{0}")]
    Validation(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Unresolved { .. } => ErrorKind::Resolution,
            Error::Parse { .. }
            | Error::Record { .. }
            | Error::OutOfRange { .. }
            | Error::Snapshot(_)
            | Error::Validation(_) => ErrorKind::Validation,
        }
    }
}
