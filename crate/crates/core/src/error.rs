use std::path::PathBuf;

use thiserror::Error;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-contract input.
    Validation,
    /// Input that is well formed but unusable for the requested analysis.
    Data,
    /// A numerical procedure could not be carried out.
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("validation error at row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lexicon contains no entries")]
    EmptyLexicon,

    #[error("ingestion error at manifest row {row}: {message}")]
    Ingestion { row: usize, message: String },

    #[error("corpus manifest contains no documents")]
    EmptyCorpus,

    #[error("document {id} cannot be scored: {reason}")]
    UnscorableDocument { id: String, reason: String },

    #[error("no document in the corpus could be scored")]
    EmptyResult,

    #[error("no scored documents for source {0}")]
    EmptySeries(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("input has zero spread; cannot standardize")]
    DegenerateScale,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("design matrix is rank deficient")]
    SingularDesign,

    #[error("imputation failed: {0}")]
    Imputation(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Format(_)
            | Error::Validation { .. }
            | Error::InvalidArgument(_)
            | Error::EmptyLexicon
            | Error::Ingestion { .. }
            | Error::EmptyCorpus => ErrorKind::Validation,
            Error::UnscorableDocument { .. }
            | Error::EmptyResult
            | Error::EmptySeries(_)
            | Error::InsufficientData(_) => ErrorKind::Data,
            Error::DegenerateScale | Error::Degenerate(_) | Error::SingularDesign | Error::Imputation(_) => {
                ErrorKind::Numerical
            }
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
