use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("missing value at row {row}, col {col}")]
    MissingValue { row: usize, col: String },

    #[error("non-numeric value '{value}' at row {row}, col {col}")]
    NonNumeric {
        row: usize,
        col: String,
        value: String,
    },

    #[error("column index {index} out of range for {ncols} feature columns")]
    ColumnOutOfRange { index: usize, ncols: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("empty feature matrix")]
    EmptyMatrix,

    #[error("length mismatch: {what} has {got} rows, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("column '{0}' is categorical; a numeric column is required")]
    NotNumeric(String),

    #[error("column '{0}' is numeric; a categorical column is required")]
    NotCategorical(String),

    #[error("insufficient supported x values")]
    InsufficientSupport,

    #[error("category merge still progressing after {passes} passes with {remaining} leaves left")]
    MergePassLimit { passes: usize, remaining: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
