use std::path::PathBuf;

/// Failure taxonomy for the whole pipeline.
///
/// The CLI maps `Numerical` to exit code 2 and every other variant to exit
/// code 1, so the variant choice is part of the public contract.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally valid input that is too small or degenerate to fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Input violates a documented invariant (bad support, duplicate keys, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A file could not be parsed; `line` is 1-based and includes the header.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    /// An iterative numerical routine failed (factorization, rejection cap).
    #[error("numerical failure in {block} at iteration {iteration}: {msg}")]
    Numerical {
        block: &'static str,
        iteration: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
