//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by model construction, discretization and solvers.
#[derive(Debug, Error)]
pub enum KinlimError {
    /// Parameters outside the admissible set of a model or operation.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A normalization integral diverges for the requested exponents.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// Configuration file could not be read or validated.
    #[error("configuration error: {0}")]
    Config(String),

    /// Feature outside the supported discretization range.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Iterative method did not meet its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Two candidate eigenvalues too close to select the fluid mode.
    #[error("ambiguous fluid eigenvalue: |mu1| = {mu1:.6e}, |mu2| = {mu2:.6e}")]
    Ambiguous { mu1: f64, mu2: f64 },

    /// Consecutive modes along a branch have small overlap.
    #[error("branch jump at eta = {eta:.6e}: overlap {overlap:.4}")]
    BranchJump { eta: f64, overlap: f64 },

    /// Linear solve or factorization failure.
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// Energy grew during a kinetic time step.
    #[error("energy violation at t = {t:.6e}: ratio {ratio:.12}")]
    EnergyViolation { t: f64, ratio: f64 },

    /// Interpolation target outside the grid support.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Kinetic and macroscopic runs carry different scaling data.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// Filesystem or serialization failure.
    #[error("io error: {0}")]
    Io(String),
}

impl KinlimError {
    /// CLI exit code: 2 for configuration problems, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            KinlimError::InvalidParams(_)
            | KinlimError::DivergentIntegral(_)
            | KinlimError::Config(_)
            | KinlimError::Unsupported(_)
            | KinlimError::RegimeMismatch(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for KinlimError {
    fn from(e: std::io::Error) -> Self {
        KinlimError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for KinlimError {
    fn from(e: serde_json::Error) -> Self {
        KinlimError::Io(e.to_string())
    }
}

impl From<csv::Error> for KinlimError {
    fn from(e: csv::Error) -> Self {
        KinlimError::Io(e.to_string())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, KinlimError>;
