//! Error type shared across the simulator.

use thiserror::Error;

/// Errors surfaced by model construction, per-slot operations, and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum SimError {
    /// Malformed configuration. Raised at construction time, never during
    /// sampling.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument is outside the operation's domain (wrong band, dimension
    /// mismatch, non-positive gain, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The instance exceeds a documented size cap of an exhaustive routine.
    #[error("instance too large: {0}")]
    Capability(String),

    /// An internal invariant failed (iteration cap, bound monitor). These
    /// indicate a bug or a broken model, not bad user input.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
