use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("invalid label `{value}` on row {row}")]
    InvalidLabel { row: usize, value: String },

    #[error("non-numeric value `{value}` in column `{column}` on row {row}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("dataset has {got} rows, at least {need} required")]
    TooFewRows { got: usize, need: usize },

    #[error("dataset shape mismatch: {0}")]
    Shape(String),

    #[error("unit index {index} out of range for {m} units")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("cannot exclude all {0} units")]
    ExcludeAll(usize),

    #[error("AUC undefined: no {0} units")]
    EmptyClass(&'static str),

    #[error("NaN where a finite value is required")]
    NotANumber,

    #[error("singular fit")]
    SingularFit,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no usable folds: every fold is missing a class")]
    NoUsableFolds,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
