//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by model construction, integration, simulation and tests.
#[derive(Debug, Error)]
pub enum Error {
    /// A measure spec fails the Lévy integrability requirement, or an
    /// integral of it diverges.
    #[error("non-integrable measure: {0}")]
    NonIntegrable(String),

    /// Arguments outside an operation's domain (e.g. eta >= epsilon).
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: requested {requested:.3e}, achieved {achieved:.3e}")]
    Quadrature { requested: f64, achieved: f64 },

    /// A theorem precondition fails and the requested quantity does not exist.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The operation is not supported for this measure configuration.
    #[error("capability error: {0}")]
    Capability(String),

    /// A scale parameter degenerated to zero where a positive one is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Grid or resolution too coarse for the requested accuracy.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Numerical failure that is neither quadrature nor resolution.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed input data (non-finite values, too few observations).
    #[error("data error: {0}")]
    Data(String),

    /// Monte Carlo calibration asked for with too little precision.
    #[error("calibration error: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
