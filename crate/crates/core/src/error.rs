//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, evolution, solvers, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Rejected grid construction parameters.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields (or a field and a coefficient vector) live on different grids.
    #[error("grid mismatch between operands")]
    GridMismatch,

    /// A scalar or structural argument is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A field value became NaN or infinite during time integration.
    #[error("non-finite field value at t = {t}")]
    NonFinite { t: f64 },

    /// The eigensolver stalled before reaching the requested residual.
    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    EigenNoConvergence { iterations: usize, residual: f64 },

    /// The inner linear (Krylov) solver broke down.
    #[error("linear solver breakdown: {0}")]
    KrylovBreakdown(String),

    /// A nonlinear solve failed in a way the caller cannot recover from.
    #[error("solver failure: {0}")]
    SolveFailure(String),

    /// A field snapshot could not be decoded.
    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
