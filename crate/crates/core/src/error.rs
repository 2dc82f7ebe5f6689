//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::cdf::KnotViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A\u{2020}| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |UU\u{2020} - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension {dim} outside the supported range 2..=16")]
    DimensionOutOfRange { dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    EigensolverStalled { sweeps: usize },

    #[error("eigenvector refinement left a residual of {residual:.3e}")]
    EigenResidual { residual: f64 },

    #[error("invalid knots: {}", KnotViolation::join(.0))]
    InvalidKnots(Vec<KnotViolation>),

    #[error("{name} = {value} is outside {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
