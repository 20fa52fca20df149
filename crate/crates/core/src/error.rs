use thiserror::Error;

/// Errors produced by the tests, estimators and simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sample size {n}: at least {min} observations are required")]
    InvalidSampleSize { n: usize, min: usize },

    #[error("observation {index} has value {value}; lifetimes must be finite and nonnegative")]
    InvalidObservation { index: usize, value: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("significance level {0} is outside (0, 1)")]
    InvalidLevel(f64),

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("invalid {family} parameter: {reason}")]
    InvalidParameter { family: &'static str, reason: String },

    #[error("argument {x} is outside the support of the {family} family")]
    Domain { family: &'static str, x: f64 },

    #[error(
        "record {index} (time {time}) is an event where the censoring survival has already reached zero"
    )]
    UnestimableTail { index: usize, time: f64 },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for failures of the numerical machinery itself rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
