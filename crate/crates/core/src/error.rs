//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by graph construction, simulation, and certification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} has no self-loop")]
    MissingSelfLoop { node: usize },

    #[error("graph window starting at k={start} has a union that is not strongly connected")]
    WindowNotConnected { start: usize },

    #[error("dimension mismatch: {what}")]
    Dimension { what: String },

    #[error("{what} did not converge: reached {achieved:e}, wanted {wanted:e}")]
    NotConverged {
        what: String,
        achieved: f64,
        wanted: f64,
    },

    #[error("{what} is not representable in f64; consult the log-domain fields")]
    Unrepresentable { what: String },

    #[error("iterate magnitude {magnitude:e} exceeded the divergence guard at step {k}")]
    Diverged { k: usize, magnitude: f64 },

    #[error("matrix is not positive definite: {what}")]
    NotPositiveDefinite { what: String },

    #[error("insufficient data: {what}")]
    InsufficientData { what: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("every run in the step-size grid diverged")]
    AllDiverged,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serde(String),
}

impl Error {
    /// Short machine-readable tag for CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingSelfLoop { .. } => "missing-self-loop",
            Error::WindowNotConnected { .. } => "window-not-connected",
            Error::Dimension { .. } => "dimension",
            Error::NotConverged { .. } => "not-converged",
            Error::Unrepresentable { .. } => "unrepresentable",
            Error::Diverged { .. } => "diverged",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::Config(_) => "config",
            Error::AllDiverged => "all-diverged",
            Error::Io(_) => "io",
            Error::Serde(_) => "serde",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
