use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the domain of a function (rating range, empty word, zero counts).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: row {row}: malformed row: {message}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("manifest row {row}: unknown genre {value:?}")]
    UnknownGenre { row: usize, value: String },

    #[error("manifest row {row}: duplicate book_id {book_id:?}")]
    DuplicateBookId { row: usize, book_id: String },

    #[error("manifest row {row}: label {label} conflicts with avg_rating {avg_rating}")]
    LabelConflict {
        row: usize,
        label: String,
        avg_rating: f64,
    },

    #[error("invalid split: {0}")]
    Split(String),

    #[error("embedding file: bad magic {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("embedding dimension {found} differs from {expected}")]
    EmbeddingDim { expected: usize, found: usize },

    #[error("embedding file has {rows} rows but the text segments into {sentences} sentences")]
    EmbeddingRows { rows: usize, sentences: usize },

    #[error("featurizing book {book_id:?}: {source}")]
    Featurize {
        book_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("training diverged: non-finite loss in epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("model was trained without the readability pathway")]
    NoReadability,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from numerics or broken internal state rather
    /// than from user input.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::Divergence { .. } | Error::Shape(_) => true,
            Error::Featurize { source, .. } => source.is_internal(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
