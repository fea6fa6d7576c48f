use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty token text at position {0}")]
    EmptyToken(usize),

    #[error("duplicate token {0:?}")]
    DuplicateToken(String),

    #[error("byte 0x{byte:02X} at offset {offset} is not covered by any token and byte fallback is disabled")]
    Unencodable { offset: usize, byte: u8 },

    #[error("token id {id} is out of range for a vocabulary of {len} tokens")]
    InvalidId { id: u32, len: usize },

    #[error("byte-fallback run ending at token index {index} is not valid UTF-8")]
    InvalidByteRun { index: usize },

    #[error("malformed vocabulary file: {0}")]
    VocabFormat(String),

    #[error("unsupported vocabulary file version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("unknown vocabulary import format {0:?}")]
    UnknownFormat(String),

    #[error("{0} contains no tokens")]
    EmptyVocabulary(String),

    #[error("word-boundary marker mismatch: base uses {base:?}, target uses {target:?}")]
    MarkerMismatch { base: char, target: char },

    #[error("candidate {0:?} has no frequency entry")]
    MissingFrequency(String),

    #[error("special token {0:?} is not in the vocabulary")]
    MissingSpecial(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

impl Error {
    /// Stable kebab-case identifier for diagnostics and foreign callers.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyToken(_) | Error::DuplicateToken(_) | Error::EmptyVocabulary(_) => "invalid-vocab",
            Error::VocabFormat(_) | Error::VersionMismatch { .. } => "invalid-vocab-file",
            Error::UnknownFormat(_) => "unknown-format",
            Error::MarkerMismatch { .. } => "marker-mismatch",
            Error::MissingFrequency(_) => "missing-frequency",
            Error::MissingSpecial(_) => "missing-special",
            Error::Unencodable { .. } => "unencodable",
            Error::InvalidId { .. } => "invalid-id",
            Error::InvalidByteRun { .. } => "invalid-byte-run",
            Error::Invalid(_) => "invalid-input",
            Error::Record { .. } | Error::Json(_) => "invalid-record",
            Error::Io { .. } => "io",
        }
    }

    /// True when the error stems from malformed inputs rather than a failure
    /// while processing valid ones.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::Unencodable { .. } | Error::InvalidId { .. } | Error::InvalidByteRun { .. }
        )
    }
}
