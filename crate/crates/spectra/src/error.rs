//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A miner-configuration field is out of range. `field` names the first
    /// violated field in declaration order.
    #[error("invalid configuration: {field}: {message}")]
    Config { field: &'static str, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{file}:{line}: column {column:?}: cannot parse {value:?}")]
    Parse {
        file: String,
        line: u64,
        column: String,
        value: String,
    },

    #[error("{file}: missing column {column:?}")]
    MissingColumn { file: String, column: String },

    #[error("dimension {dim} ({name}) is degenerate: lower == upper == {value}")]
    DegenerateDimension { dim: usize, name: String, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid json in {path}: {message}")]
    Json { path: PathBuf, message: String },

    #[error("export error: {0}")]
    Export(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("simulation error: {0}")]
    Simulation(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for usage/config/input errors,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Schema(_)
            | Error::Parse { .. }
            | Error::MissingColumn { .. }
            | Error::DegenerateDimension { .. }
            | Error::DimensionMismatch { .. }
            | Error::Empty(_)
            | Error::Json { .. }
            | Error::Export(_) => 2,
            Error::Io { source, .. } => match source.kind() {
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => 2,
                _ => 1,
            },
            Error::Invariant(_) | Error::Simulation(_) => 1,
        }
    }
}
