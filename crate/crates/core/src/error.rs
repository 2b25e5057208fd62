use thiserror::Error;

/// Errors shared across the toolkit.
///
/// Soft outcomes (a search running out of budget, an enumeration hitting its
/// cap) are *not* errors; they are reported through flags on the result types.
#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A symbolic operation would leave the finite fragment (tuple length or
    /// base cardinality past the horizon). A fragment boundary, not a bug.
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),

    /// A materialization or enumeration would exceed its hard size cap.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// Malformed input data (files, tables, parameter strings).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Arithmetic left the fixed-width range where exactness is tracked.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    /// A machine-checked certificate failed. Indicates a bug, not a soft
    /// outcome; carries the first violating argument.
    #[error("certificate failed at k = {k}: {detail}")]
    CertificateFailed { k: u64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
