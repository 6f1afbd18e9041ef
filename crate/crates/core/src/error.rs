use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty collection")]
    EmptyCollection,

    #[error("passage {passage_id} has genre {found:?}, but the collection is labeled {expected:?}")]
    GenreMismatch {
        passage_id: String,
        expected: crate::index::CollectionLabel,
        found: crate::corpus::Genre,
    },

    #[error("duplicate passage id {0}")]
    DuplicatePassage(String),

    #[error("indexes were built with different analysis settings or units")]
    ConfigMismatch,

    #[error("passage id {0} exists in both indexes")]
    PassageCollision(String),

    #[error("index format version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("malformed index file {file}: {reason}")]
    Format { file: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("no feedback documents")]
    NoFeedbackDocuments,

    #[error("degenerate feedback: every feedback passage has zero query likelihood")]
    DegenerateFeedback,

    #[error("collection {0} is not loaded")]
    MissingCollection(crate::index::CollectionLabel),

    #[error("{file}:{line}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },

    #[error("run and qrels share no query ids")]
    DisjointQueries,

    #[error("assessor error: {0}")]
    Assessor(String),

    #[error("mismatched judgment keys: ({0}) vs ({1})")]
    KeyMismatch(String, String),

    #[error("config error: {0}")]
    Config(String),

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

    pub(crate) fn format(file: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            file: file.into(),
            reason: reason.into(),
        }
    }
}
