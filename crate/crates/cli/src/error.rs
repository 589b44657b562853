use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: line {line}: {message}")]
    MalformedRow { path: PathBuf, line: u64, message: String },
    #[error("data error: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] coherent_knn_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl BenchError {
    /// Process exit status: 2 configuration, 3 data, 4 internal.
    pub fn exit_code(&self) -> u8 {
        use coherent_knn_core::Error as E;
        match self {
            BenchError::Config(_) => 2,
            BenchError::MalformedRow { .. } | BenchError::Data(_) | BenchError::Io { .. } => 3,
            BenchError::Core(e) => match e {
                E::KOutOfRange { .. }
                | E::InvalidNoise(_)
                | E::InvalidArgument(_)
                | E::NotPowerOfTwo(_)
                | E::AngleOutOfRange(_)
                | E::OrderTooLarge(_) => 2,
                E::NonFinite(_) | E::Empty(_) | E::UnknownLabel { .. } => 3,
                _ => 4,
            },
            BenchError::Output(_) => 4,
        }
    }
}

impl From<serde_json::Error> for BenchError {
    fn from(e: serde_json::Error) -> Self {
        BenchError::Output(e.to_string())
    }
}
