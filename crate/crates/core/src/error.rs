use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("timestamps decrease at record {index} ({prev} > {next}); pass the sort option to reorder")]
    NonMonotone { index: usize, prev: f64, next: f64 },

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("motion model {model} expects {expected} parameters, got {got}")]
    DimensionMismatch {
        model: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("shape mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    ShapeMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("kernel width must be positive, got {0}")]
    InvalidSigma(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scene produces no signal events inside the sensor for the whole duration")]
    EmptyScene,

    #[error("non-finite value encountered at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("time {t} lies outside the reference span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },

    #[error("{0}")]
    Metric(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
