//! Error type shared by every module in this crate.
//!
//! Variants are grouped by how a caller is expected to react:
//!
//! * `Config`, `Precondition`, `Dimension`, `ExhaustiveGuard` — the request
//!   itself is invalid; fix the input and retry.
//! * `Format` — a channel file is malformed; the offset points at the first
//!   byte that failed validation.
//! * `Singular`, `Numeric`, `Domain`, `Degenerate` — the computation hit a
//!   numerically hopeless input (rank-deficient Gram matrix, non-finite
//!   value, out-of-domain argument).
//! * `Io` — the underlying filesystem operation failed.

use std::path::PathBuf;
use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for channel generation, rate evaluation, selection
/// and experiment orchestration.
#[derive(Debug, Error)]
pub enum Error {
    /// A tensor, mask or matrix dimension does not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A scenario or scene configuration field is invalid.
    #[error("invalid configuration: field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// An operation was called on inputs that violate its contract.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A scalar argument lies outside the mathematical domain of the
    /// operation (e.g. a non-positive SNR or power budget).
    #[error("argument out of domain: {0}")]
    Domain(String),

    /// The input is structurally degenerate (e.g. an all-zero channel).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A binary channel file failed validation. `offset` is the byte
    /// position of the first offending byte.
    #[error("channel file format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    /// A per-subcarrier Gram matrix is singular or too ill-conditioned to
    /// invert reliably.
    #[error(
        "singular system on subcarrier {subcarrier}: \
         1-norm condition estimate {cond:.3e} exceeds the trust threshold"
    )]
    Singular { subcarrier: usize, cond: f64 },

    /// A numeric routine produced or encountered a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An exhaustive search was refused because the candidate count is
    /// beyond the configured enumeration budget.
    #[error(
        "exhaustive search refused: {count} candidate subsets exceed \
         the budget of {budget}"
    )]
    ExhaustiveGuard { count: u128, budget: u128 },

    /// Filesystem failure while reading or writing `path`.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand for a `Config` error.
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Shorthand for an `Io` error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_name_the_failing_piece() {
        let e = Error::config("n_sweep", "entry 0 below the user count");
        assert!(e.to_string().contains("n_sweep"));

        let e = Error::Format {
            offset: 8,
            reason: "dimension K must be at least 1".into(),
        };
        let msg = e.to_string();
        assert!(msg.contains("byte 8"), "format errors carry the offset: {msg}");
        assert!(msg.contains("dimension"), "format errors explain the field: {msg}");

        let e = Error::Singular {
            subcarrier: 3,
            cond: 1.0e14,
        };
        assert!(e.to_string().contains("subcarrier 3"));

        let e = Error::ExhaustiveGuard {
            count: 151_473_214_816,
            budget: 1_000_000,
        };
        assert!(e.to_string().contains("151473214816"));
    }
}
