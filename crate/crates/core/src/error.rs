use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record in a text input could not be accepted.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("no documents")]
    NoDocuments,

    #[error("all documents empty after filtering")]
    AllDocumentsEmpty,

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The model assigns zero probability to a token that was observed.
    #[error("zero model probability for observed token (document {doc}, term {term})")]
    ZeroProbability { doc: usize, term: usize },

    /// The corpus cannot support the requested statistic (e.g. SS_tot = 0).
    #[error("degenerate corpus: {0}")]
    DegenerateCorpus(String),

    #[error("sweep cell {cell}: {source}")]
    SweepCell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }
}
