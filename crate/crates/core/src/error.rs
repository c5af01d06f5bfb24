use std::path::PathBuf;

use thiserror::Error;

use crate::engine::Timestamp;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation space needs at least 2 terms, got {0}")]
    SpaceTooSmall(usize),

    #[error("duplicate evaluation term {0:?}")]
    DuplicateTerm(String),

    #[error("expected {expected} probabilities, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("probability {value} at index {index} is not in [0, 1]")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("distributions are defined over different evaluation spaces")]
    SpaceMismatch,

    /// A numeric parameter is outside its allowed range.
    #[error("{name} = {value} is out of range ({expected})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("cannot move backwards in time from {from} to {to}")]
    TimeTravel { from: Timestamp, to: Timestamp },

    #[error("agent {0:?} cannot rate itself")]
    SelfRating(String),

    #[error("a team cannot play itself ({0:?})")]
    SelfMatch(String),

    #[error("input is not sorted by time at position {index}")]
    Unsorted { index: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{rejected} of {total} rows rejected in {path}, above the 1% limit")]
    TooManyRejects {
        path: PathBuf,
        rejected: usize,
        total: usize,
    },

    #[error("cannot access {path}")]
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

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by a bad parameter value rather than bad data.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::SpaceTooSmall(_) | Error::DuplicateTerm(_)
        )
    }
}
