use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode index {index} out of range for {n_modes} mode(s)")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix dimension {0} is not a positive even number")]
    OddDimension(usize),

    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("uncertainty bound violated: smallest symplectic eigenvalue {0}")]
    UncertaintyViolation(f64),

    #[error("matrix is not symplectic (max deviation {0:e})")]
    NotSymplectic(f64),

    #[error("invalid state: covariance determinant {0:e} is not positive")]
    InvalidState(f64),

    #[error("eigenvalue solver did not converge")]
    EigenSolve,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("level {level} is not bracketed on [0, pi/2] at r = {r} (supremum {sup})")]
    NotBracketed { r: f64, level: f64, sup: f64 },

    #[error("quadrature grid under-resolved: normalization {0}")]
    UnderResolved(f64),

    #[error("kernel degenerates to a delta function at theta = {0}")]
    DegenerateKernel(f64),

    #[error("regulator extrapolation did not converge (successive estimates differ by {0:e})")]
    ExtrapolationFailed(f64),
}
