//! Error type shared by the library.

use thiserror::Error;

/// Errors produced by the post-processing library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A probability or other bounded input fell outside its legal range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bit index referenced a position outside the frame.
    #[error("index {index} out of range for frame length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// Two sequences that must agree in length did not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// An operation that requires data received an empty input.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// The simulator could not reach the requested sifted-bit count.
    #[error("iteration cap reached after {pulses} pulses ({sifted} of {target} sifted bits)")]
    IterationCap {
        pulses: u64,
        sifted: usize,
        target: usize,
    },

    /// A linear program had no feasible point (inconsistent observables).
    #[error("infeasible linear program: {0}")]
    InfeasibleLp(String),

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Invalid run configuration.
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
}

impl CoreError {
    /// Convenience constructor for domain errors.
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}
