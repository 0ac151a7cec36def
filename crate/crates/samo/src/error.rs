use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum SamoError {
    /// Mis-sized inputs, bad layer specs, invalid option indices, unknown
    /// environment names and the like.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value left its mathematical domain (e.g. |action| >= 1 for the
    /// inverse-tanh recovery).
    #[error("domain error: {0}")]
    Domain(String),

    /// Non-finite numbers where finite ones are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Stepping a finished episode, evaluating an empty option set, etc.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed checkpoint, map or metrics data.
    #[error("format error: {0}")]
    Format(String),

    /// A run was stopped mid-phase (used by the resume machinery).
    #[error("run interrupted")]
    Interrupted,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
