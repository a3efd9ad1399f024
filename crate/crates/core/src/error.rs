use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Indices refer to the order in which the points were supplied.
    #[error("points #{first} {a} and #{second} {b} are at distance {distance} < 1")]
    MinDistanceViolation {
        first: usize,
        second: usize,
        a: Point,
        b: Point,
        distance: f64,
    },

    #[error("point #{index} {point} has norm {norm} > window radius {window}")]
    OutOfWindow {
        index: usize,
        point: Point,
        norm: f64,
        window: f64,
    },

    #[error("radius t = {t} exceeds the safe window limit {limit}")]
    GridBeyondWindow { t: f64, limit: f64 },

    #[error("method {method} is not applicable: {reason}")]
    MethodInapplicable { method: &'static str, reason: String },

    #[error("schedule exhausted at step {step}: {reason}")]
    ScheduleExhausted { step: usize, reason: String },

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
