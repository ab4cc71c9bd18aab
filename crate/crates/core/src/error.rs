use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("radius {index} is not positive")]
    NonPositiveRadius { index: usize },
    #[error("radius {index} lies outside the restricted box [1, 1 + c_n^2]")]
    OutsideRestrictedBox { index: usize },
    #[error("axis index {k} out of range for dimension {n}")]
    AxisOutOfRange { k: usize, n: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("singular matrix")]
    Singular,
    #[error("corrector failed to converge after {iterations} iterations (residual {residual:e})")]
    NonConvergent { iterations: usize, residual: f64 },
    #[error("degenerate intersection: gradients are parallel along the fibre")]
    DegenerateIntersection,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
