use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or invalid configuration (grids, experiment settings).
    #[error("configuration error: {0}")]
    Config(String),

    /// A series could not reach the requested tolerance within its iteration cap.
    #[error("truncation failure: tail estimate {achieved:e} above requested {requested:e} after {terms} terms")]
    Truncation {
        achieved: f64,
        requested: f64,
        terms: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The solver produced a non-finite or exploding field.
    #[error("numerical failure at step {step}: {detail}")]
    Numerical { step: usize, detail: String },

    /// A failure inside a specific Monte Carlo replicate.
    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// Matrix factorization failed beyond the clipping tolerance.
    #[error("factorization failure: {0}")]
    Factorization(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error: 2 for configuration and usage
    /// problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Config(_)
            | Error::Unsupported(_)
            | Error::Usage(_)
            | Error::Parse(_)
            | Error::Io(_) => 2,
            Error::Truncation { .. }
            | Error::Numerical { .. }
            | Error::Degenerate(_)
            | Error::Factorization(_) => 3,
            Error::Replicate { source, .. } => source.exit_code(),
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
