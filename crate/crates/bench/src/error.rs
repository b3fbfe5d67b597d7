use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] spgemm_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        BenchError::Usage(msg.into())
    }

    /// 1 for bad arguments, 2 for anything that went wrong reading, parsing,
    /// computing or writing.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Usage(_) => 1,
            _ => 2,
        }
    }
}

/// Exit code for a run whose product disagreed with the oracle.
pub const EXIT_VERIFICATION_FAILED: u8 = 3;
