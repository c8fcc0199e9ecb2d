use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("zero polynomial not allowed here")]
    ZeroPolynomial,
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("polynomial must be squarefree")]
    NotSquarefree,
    #[error("polynomial is not irreducible")]
    NotPrime,
    #[error("operands live in different rings: {0}")]
    RingMismatch(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("character is trivial")]
    TrivialCharacter,
    #[error("unsupported character: {0}")]
    Unsupported(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("budget exceeded: estimated {estimate:.3e} character evaluations (limit {limit:.0e}); pass --force to run anyway")]
    Budget { estimate: f64, limit: f64 },
    #[error("corrupt record at {path}:{line}: {msg}")]
    CorruptRecord { path: String, line: usize, msg: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
