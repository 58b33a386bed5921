use thiserror::Error;

/// Errors raised by the estimators, the numerics underneath them, and the I/O layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("column {column} has constant ranks")]
    DegenerateColumn { column: usize },

    #[error("empirical scatter matrix is singular (n = {n}, d = {d})")]
    SingularScatter { n: usize, d: usize },

    #[error("need more than k = {k} samples, got n = {n}")]
    InsufficientSamples { n: usize, k: usize },

    #[error("no usable correlation draw after {retries} retries")]
    DegenerateDraw { retries: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    ParseError {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },

    #[error("input contains no data rows")]
    EmptyFile,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name of the variant, used in result documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DomainError(_) => "DomainError",
            Error::DegenerateColumn { .. } => "DegenerateColumn",
            Error::SingularScatter { .. } => "SingularScatter",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::DegenerateDraw { .. } => "DegenerateDraw",
            Error::Shape(_) => "Shape",
            Error::ParseError { .. } => "ParseError",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::EmptyFile => "EmptyFile",
            Error::Io(_) => "Io",
        }
    }

    /// True for failures caused by malformed input data rather than numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Shape(_)
                | Error::ParseError { .. }
                | Error::NonFiniteValue { .. }
                | Error::EmptyFile
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
