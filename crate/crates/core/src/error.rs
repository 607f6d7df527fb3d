use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is not square: {rows} rows but {cols} label columns")]
    NonSquare { rows: usize, cols: usize },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("row {index} is labelled `{found}` but column {index} is `{expected}`")]
    LabelMismatch {
        index: usize,
        expected: String,
        found: String,
    },

    #[error("invalid count `{value}` at row `{row}`, column `{col}`: expected a nonnegative integer")]
    InvalidCount {
        row: String,
        col: String,
        value: String,
    },

    #[error("article counts are required for this operation but none were loaded")]
    MissingArticles,

    #[error("article count for `{label}`: {message}")]
    InvalidArticles { label: String, message: String },

    #[error("row `{0}` has no outgoing citations and the dangling policy is `error`")]
    Dangling(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} requires x > 0, got {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NotConverged { what: String, iterations: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("correlation is undefined for a constant input")]
    ConstantInput,

    #[error("{failed} of {total} half-sampling replicates failed for {method}")]
    TooManyFailures {
        method: String,
        failed: usize,
        total: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical procedures rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::Singular(_) | Error::TooManyFailures { .. }
        )
    }
}
