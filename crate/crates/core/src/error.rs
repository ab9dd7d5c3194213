use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no records")]
    Empty,

    #[error("test {test_id:?} has {found} sessions, expected {expected}")]
    SessionCount {
        test_id: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate test_id {0:?}")]
    DuplicateTest(String),

    #[error("invalid dataset: {0}")]
    Invalid(String),

    #[error("session index {index} out of range (history has {count} sessions)")]
    SessionOutOfRange { index: usize, count: usize },

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(&'static str),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),

    #[error("zero total duration")]
    ZeroDuration,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
