use thiserror::Error;

/// Errors produced by the state, channel, rate and diffraction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncation deficit {deficit:.3e} exceeds tolerance {tolerance:.3e} at dimension {dim}")]
    Truncation {
        deficit: f64,
        tolerance: f64,
        dim: usize,
    },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("unphysical covariance: symplectic eigenvalue {0} below 1")]
    Unphysical(f64),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error(
        "rate not converged in truncation: {rate} bits at dim {dim}, {refined} bits at dim {refined_dim}"
    )]
    NonConvergence {
        rate: f64,
        dim: usize,
        refined: f64,
        refined_dim: usize,
    },

    #[error("lower bound {lower} exceeds upper bound {upper}")]
    BoundOrder { lower: f64, upper: f64 },

    #[error("outside the faint-signal regime: {0}")]
    OutOfRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
