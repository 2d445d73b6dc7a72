use thiserror::Error;

/// Errors raised by the operator algebra and everything built on top of it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QhermError {
    #[error("invalid basis: dim {dim} (need >= 8), margin {margin} (need < dim/2)")]
    InvalidBasis { dim: usize, margin: usize },

    #[error("margin {margin} out of range for dim {dim}")]
    MarginOutOfRange { margin: usize, dim: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("operators live in different bases (dim {left} vs {right})")]
    BasisMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian: max |M - M^dag| = {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix exponential overflows: 1-norm {norm:e}")]
    ExpOverflow { norm: f64 },

    #[error("eigen solver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("non-finite entries in {what}")]
    NonFinite { what: &'static str },

    #[error("grid point {x} lies outside the numeric support |x| <= {support}")]
    OutsideSupport { x: f64, support: f64 },

    #[error("|epsilon| must be < 1, got {epsilon}")]
    EpsilonOutOfRange { epsilon: f64 },

    #[error("level {level} outside trusted window of {window}")]
    UntrustedLevel { level: usize, window: usize },

    #[error("degenerate levels {i} and {j}: gap {gap:e}")]
    Degenerate { i: usize, j: usize, gap: f64 },

    #[error("polynomial degree {degree} exceeds the cap of {cap}")]
    DegreeTooHigh { degree: usize, cap: usize },

    #[error("polarization must be a unit vector, |n| = {norm}")]
    NotUnit { norm: f64 },

    #[error("construction check failed: {what}: residual {residual:e} > {threshold:e}")]
    ConstructionCheck {
        what: &'static str,
        residual: f64,
        threshold: f64,
    },

    #[error(
        "level {level}: eta-weighted state disagrees with the Hermitian picture by {defect:e}"
    )]
    IllConditioned { level: usize, defect: f64 },

    #[error("pulse width must be positive, got {sigma}")]
    BadPulse { sigma: f64 },
}

pub type Result<T> = std::result::Result<T, QhermError>;
