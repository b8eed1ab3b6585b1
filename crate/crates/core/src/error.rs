//! Crate error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate doc id `{doc_id}` in {context}")]
    DuplicateDocId { doc_id: String, context: String },

    #[error("duplicate query id `{0}`")]
    DuplicateQueryId(String),

    #[error("bad file format in {path}: {reason}")]
    BadFormat { path: PathBuf, reason: String },

    #[error("invalid embedding matrix: {0}")]
    InvalidMatrix(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("encoder error for `{id}`: {reason}")]
    Encoder { id: String, reason: String },

    #[error("llm client error: {0}")]
    LlmClient(String),

    #[error("http error: {0}")]
    Http(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn bad_format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::BadFormat {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn malformed(
        path: impl Into<PathBuf>,
        line: usize,
        reason: impl Into<String>,
    ) -> Self {
        Error::MalformedLine {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }
}
