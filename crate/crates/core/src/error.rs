use thiserror::Error;

/// Failures shared by every estimator in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("backward iteration requested on a non-invertible fiber map")]
    BackwardNotInvertible,
    #[error("fiber matrix is not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("operation requires a global affine hyperbolic structure")]
    NotAffine,
    #[error("epsilon {eps} is at or above the injectivity scale {limit}")]
    EpsilonTooLarge { eps: f64, limit: f64 },
    #[error("points are too far apart for a local product ({distance} >= {limit})")]
    PointsTooFar { distance: f64, limit: f64 },
    #[error("specification spacing {spacing} is below the mixing gap {required}")]
    SpacingTooSmall { spacing: i64, required: i64 },
    #[error("predicted cost {predicted} exceeds the evaluation budget {budget}")]
    BudgetExceeded { predicted: u64, budget: u64 },
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("contraction ledger violated: {0}")]
    LedgerViolation(String),
    #[error("local product intersection not found: {0}")]
    IntersectionNotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for [`Error::InvalidArgument`].
pub fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
