use std::path::PathBuf;

use thiserror::Error;

/// Harness errors, grouped by the process exit code they map to.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("numerical failure at {point}: {source}")]
    Numerical {
        point: String,
        #[source]
        source: aev_core::Error,
    },
    #[error("{0}")]
    Fit(String),
    #[error("records: {0}")]
    Records(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Parse { .. } => 2,
            BenchError::Numerical { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
