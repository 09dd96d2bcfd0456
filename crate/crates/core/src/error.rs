use thiserror::Error;

/// Every fallible operation in the crate reports through this type.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("shape {nrows}x{ncols} is out of range (each side must be 1..=8)")]
    BadShape { nrows: usize, ncols: usize },
    #[error("expected a square matrix, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },
    #[error("{what} supports size at most {max}, got {got}")]
    TooLarge {
        what: &'static str,
        max: usize,
        got: usize,
    },
    #[error("unsupported shape {n}x{p} for {what}")]
    UnsupportedShape {
        what: &'static str,
        n: usize,
        p: usize,
    },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("catalog entry `{name}` failed its self-check: {detail}")]
    CatalogCheck { name: String, detail: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
