//! Error taxonomy shared by every module in the crate.
//!
//! Variants split along the caller's recovery options: parameter and domain
//! errors are usage bugs, numerical variants signal a failed run that should
//! be reported with diagnostics, and I/O wraps the underlying cause.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An evaluation point lies outside the mathematical domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two states defined on different grids were combined.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The grid cannot resolve the requested state.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// State amplitude reached the box edges; results would be contaminated.
    #[error("support error: {0}")]
    Support(String),

    /// A propagation run lost unitarity beyond the accepted drift.
    #[error("instability: {0}")]
    Instability(String),

    /// Imaginary-time relaxation exhausted its iteration budget.
    #[error(
        "convergence failure: residual {residual:.3e} after {iterations} iterations \
         (tolerance {tolerance:.3e})"
    )]
    Convergence {
        residual: f64,
        iterations: usize,
        tolerance: f64,
    },

    /// An output location already holds data and overwriting was not allowed.
    #[error("refusing to overwrite existing output: {0} (pass --force to allow)")]
    Overwrite(String),

    /// Filesystem failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
