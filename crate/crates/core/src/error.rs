use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("invalid tokenizer: {0}")]
    InvalidTokenizer(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("nothing to adapt: no out-of-vocabulary domain words in corpus")]
    NothingToAdapt,

    #[error("candidate vocabularies have an empty intersection for every grid configuration")]
    EmptyIntersection,

    #[error("cleaned vocabulary empty")]
    CleanedVocabularyEmpty,

    #[error("record {0}: summary is empty after normalization")]
    EmptySummary(String),

    #[error("unknown record id {0:?}")]
    UnknownRecord(String),

    #[error("duplicate record id {0:?}")]
    DuplicateRecord(String),

    #[error("embedding matrix: {0}")]
    Matrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }
}
