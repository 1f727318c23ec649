use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus: must be at least 2")]
    InvalidModulus,
    #[error("invalid key parameter: {0}")]
    KeyParameter(String),
    #[error("message unit out of range [0, p-1]")]
    MessageRange,
    #[error("invalid ciphertext: {0}")]
    InvalidCiphertext(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("corrupt cipher bundle: {0}")]
    CorruptBundle(String),
    #[error("corrupt permutation: not a bijection")]
    CorruptPermutation,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse classification used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Format,
    Crypto,
    Capacity,
    Input,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidModulus
            | Error::KeyParameter(_)
            | Error::MessageRange
            | Error::InvalidCiphertext(_)
            | Error::InvalidValue(_)
            | Error::CorruptBundle(_) => ErrorKind::Crypto,
            Error::Capacity(_) => ErrorKind::Capacity,
            Error::Shape(_)
            | Error::Format(_)
            | Error::UnsupportedFormat(_)
            | Error::CorruptPermutation
            | Error::Io(_) => ErrorKind::Format,
            Error::InvalidInput(_) => ErrorKind::Input,
        }
    }
}
