use std::path::PathBuf;

pub type SimResult<T> = Result<T, SimError>;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Model(#[from] iks_core::Error),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: malformed shard file: {reason}")]
    ShardFormat { path: PathBuf, reason: String },
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Scenario(_) | SimError::Model(_) => 1,
            SimError::OracleMismatch(_) => 2,
            SimError::Io { .. } | SimError::ShardFormat { .. } => 3,
        }
    }
}
