use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The `Display` form of each variant starts with the variant name so that
/// command-line users (and scripts grepping stderr) see a stable tag.
#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyDocument: {0}")]
    EmptyDocument(String),

    #[error("EmptyCorpus: corpus contains no documents")]
    EmptyCorpus,

    #[error("DegenerateStats: sentence and word counts must be at least 1 (got sentences={sentences}, words={words})")]
    DegenerateStats { sentences: usize, words: usize },

    #[error("MissingScore: no neural difficulty score for document {0:?}")]
    MissingScore(String),

    #[error("MissingSurprisal: no surprisal source for document {0:?}")]
    MissingSurprisal(String),

    #[error("TooSmall: a tertile split needs at least 3 documents, got {0}")]
    TooSmall(usize),

    #[error("MissingKey: no complete cells for {axis} {key:?}")]
    MissingKey { axis: String, key: String },

    #[error("ParseError: {source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("ValidationError: {0}")]
    Validation(String),

    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem failures, false for bad input data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
