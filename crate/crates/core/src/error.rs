use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown or unsupported algebra {0}")]
    UnknownAlgebra(String),
    #[error("malformed algebra table at line {line}: {msg}")]
    Table { line: usize, msg: String },
    #[error("invalid node index {node} for rank {rank}")]
    BadNode { node: usize, rank: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("lattice mismatch: {0}")]
    Lattice(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
