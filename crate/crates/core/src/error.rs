//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DdError {
    /// A configuration violates a structural constraint (grid geometry,
    /// pilot layout exceeding the frame, inconsistent chirp parameters).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An index is outside its admissible range.
    #[error("index out of range: {0}")]
    Range(String),

    /// Vector/matrix dimensions do not line up, or a candidate model is
    /// larger than the observation count.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A factorization or solve failed numerically.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A sampling condition can never be satisfied (e.g. non-empty support
    /// requested with zero activity probability).
    #[error("unsatisfiable condition: {0}")]
    Unsatisfiable(String),

    /// Metric is undefined for the given inputs (e.g. NMSE of a zero channel).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A serialized artifact (matrix container, config file) is malformed.
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, DdError>;
