use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("duplicate id {id:?} on lines {first} and {second}")]
    DuplicateId { id: String, first: usize, second: usize },

    #[error("{path}:{line}: {message}")]
    ConfigFile { path: String, line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tweet {id:?} has no {stream} stream")]
    MissingStream { id: String, stream: &'static str },

    #[error("keyword set is empty")]
    EmptyKeywords,

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("training diverged: {0}")]
    NonFinite(String),

    #[error("feature index {index} outside vocabulary of size {vocab_size}")]
    IndexOutOfRange { index: u32, vocab_size: u32 },

    #[error("empty evaluation")]
    EmptyEvaluation,

    #[error("sequence lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("undefined ICC: {0}")]
    UndefinedIcc(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("untrained session")]
    Untrained,

    #[error("unknown tweet id {0:?}")]
    UnknownId(String),

    #[error("invalid label {0}; expected 0 or 1")]
    InvalidLabel(i64),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
