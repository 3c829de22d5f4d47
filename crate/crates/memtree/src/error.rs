//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by tree operations, providers, and persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Remote provider could not be reached after all retries.
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),

    /// Remote provider answered, but not in the expected shape.
    #[error("protocol error: {0}")]
    ProtocolError(String),

    /// A mean-embedding merge collapsed to the zero vector.
    #[error("degenerate embedding: {0}")]
    DegenerateEmbedding(String),

    /// Input exceeds a hard size limit (e.g. brute-force enumeration).
    #[error("too large: {0}")]
    TooLarge(String),

    /// A corpus line failed to parse or lacked a required field.
    #[error("schema error at line {line}: {message}")]
    SchemaError { line: usize, message: String },

    #[error("unsupported snapshot version {found}, supported version is {supported}")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable kind, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NotFound(_) => "not-found",
            Error::InvalidState(_) => "invalid-state",
            Error::ProviderUnavailable(_) => "provider-unavailable",
            Error::ProtocolError(_) => "protocol-error",
            Error::DegenerateEmbedding(_) => "degenerate-embedding",
            Error::TooLarge(_) => "too-large",
            Error::SchemaError { .. } => "schema-error",
            Error::UnsupportedVersion { .. } => "unsupported-version",
            Error::CorruptSnapshot(_) => "corrupt-snapshot",
            Error::Io(_) => "io-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
