use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("operands live on different Hilbert spaces")]
    SpaceMismatch,

    #[error("operator is not Hermitian (max element deviation {max_dev:.3e})")]
    NonHermitian { max_dev: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown coupling operator '{0}'")]
    UnknownOperator(String),

    #[error("detector response undefined at omega = {omega}: table covers [{lo}, {hi}]")]
    ResponseOutOfRange { omega: f64, lo: f64, hi: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
