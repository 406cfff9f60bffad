use alloc::string::String;

/// Errors raised by constructors, samplers and estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate axis {axis}: low {low} is not below high {high}")]
    DegenerateAxis { axis: usize, low: f64, high: f64 },
    #[error("point lies outside the window")]
    OutsideWindow,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("windows differ")]
    WindowMismatch,
    #[error("boxes overlap: {0} and {1}")]
    OverlappingBoxes(usize, usize),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("covariance factorization failed at pivot {0}")]
    Factorization(usize),
    #[error("quadrature did not converge (estimated error {0:e})")]
    Quadrature(f64),
    #[error("unnormalized pmf: total mass {0}")]
    Unnormalized(f64),
    #[error("missing marks: {0}")]
    MissingMarks(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
