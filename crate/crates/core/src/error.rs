use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {context}")]
    NonFinite { context: String },

    #[error("trajectory diverged at step {step} (|x| > {limit:e})")]
    Diverged { step: usize, limit: f64 },

    #[error("series too short: need at least {min} samples, got {len}")]
    SeriesTooShort { min: usize, len: usize },

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("rank deficient for requested n_pod = {requested} (eigenvalue {index} is {value:e}, max {max:e})")]
    RankDeficient {
        requested: usize,
        index: usize,
        value: f64,
        max: f64,
    },

    #[error("malformed DMAT data at byte offset {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error("CSV error at row {row}, column {col}: {msg}")]
    Csv { row: usize, col: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Usage and configuration problems map to exit code 1, everything else to 2.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidArgument(_))
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
