use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: &'static str },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("vocabulary is empty after filtering (min_df={min_df}, max_df_fraction={max_df_fraction}); loosen the thresholds")]
    EmptyVocabulary { min_df: usize, max_df_fraction: f64 },

    #[error("topic count {k} out of range for a {rows}x{cols} matrix")]
    RankOutOfRange { k: usize, rows: usize, cols: usize },

    #[error("input matrix has a negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty result: {0}")]
    Empty(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
