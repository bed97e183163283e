use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{value} has no inverse modulo {modulus}")]
    NotInvertible { value: String, modulus: String },

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("{0} is not a quadratic residue")]
    NonResidue(String),

    #[error("target is not in the subgroup generated by the base")]
    NotInSubgroup,

    #[error("discrete log solver gave up after {iterations} iterations")]
    BudgetExhausted { iterations: u64 },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("corrupted ciphertext: {0}")]
    Corrupted(String),

    #[error("attack not applicable: {0}")]
    Inapplicable(String),

    #[error("ambiguous decode: {0}")]
    Ambiguous(String),

    #[error("parse error at {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error("fixture integrity check failed: {0}")]
    Fixture(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn parse(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
