use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum RecurError {
    /// Invalid or mismatched configuration (window mismatch, bad weights, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was asked for that the given operator family cannot
    /// support (e.g. the orbit-sup metric of a family with unbounded orbits).
    #[error("unsupported for this operator family: {0}")]
    Unsupported(String),

    /// An iteration/search cap was exceeded before a closed form could take over.
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),

    /// Numeric overflow (binomial terms, non-unimodular powers, ...).
    #[error("numeric overflow: {0}")]
    Overflow(String),

    /// Degenerate input (e.g. ratio denominators identically below the floor).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A schedule or sequence failed a certification check; the message
    /// carries the failing partial sum or invariant.
    #[error("certification failed: {0}")]
    Certification(String),

    /// Unknown scenario or probe name.
    #[error("unknown name: {0}")]
    UnknownName(String),
}

pub type Result<T> = std::result::Result<T, RecurError>;
