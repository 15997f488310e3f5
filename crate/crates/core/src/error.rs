//! Error type shared across the crate.

use thiserror::Error;

/// Coarse error category, used by callers that need to map failures onto
/// process exit codes or machine-readable reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed or inconsistent input (shapes, axes, parameter ranges).
    Input,
    /// Numerical failure (non-convergence, nonpositive pivots, overflow).
    Numeric,
    /// The hyperparameter search produced no usable result.
    Optimizer,
}

#[derive(Debug, Error)]
pub enum GpError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("axis {axis} out of range for rank-{rank} tensor")]
    AxisOutOfRange { axis: usize, rank: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge within {0} sweeps")]
    EigenNoConvergence(usize),

    #[error(
        "nonpositive eigenvalue-tensor entry {value:.6e} at index {index:?}; \
         increase sigma_noise or rely on the jitter floor"
    )]
    NonPositiveEigenEntry { value: f64, index: Vec<usize> },

    #[error("Cholesky factorization failed at pivot {pivot} (value {value:.6e})")]
    CholeskyFailed { pivot: usize, value: f64 },

    #[error("hyperparameter on or outside its prior support: {0}")]
    ThetaOnBoundary(String),

    #[error("internal consistency violated: {0}")]
    Inconsistency(String),

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),
}

impl GpError {
    pub fn category(&self) -> ErrorCategory {
        use GpError::*;
        match self {
            ShapeMismatch(_) | AxisOutOfRange { .. } | InvalidParameter(_) | Validation(_)
            | CapExceeded(_) | ThetaOnBoundary(_) => ErrorCategory::Input,
            NotSymmetric(_)
            | EigenNoConvergence(_)
            | NonPositiveEigenEntry { .. }
            | CholeskyFailed { .. }
            | Inconsistency(_) => ErrorCategory::Numeric,
            OptimizerFailed(_) => ErrorCategory::Optimizer,
        }
    }
}

pub type Result<T> = std::result::Result<T, GpError>;
