//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by register operations, protocols, and reports.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument violated a precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A mode that was already measured (and removed) was addressed again.
    #[error("mode {0} is stale: it was consumed by a homodyne measurement")]
    StaleMode(usize),

    /// A variance was requested for a form that still contains symbolic
    /// input-quadrature labels.
    #[error("form contains symbolic input labels ({0}); subtract the reference form first")]
    SymbolicInput(String),

    /// The entanglement graph is unusable for the superdense construction.
    #[error("topology error: {0}")]
    Topology(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
