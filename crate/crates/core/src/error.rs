use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{size}x{size} window centered at ({x}, {y}) leaves the {width}x{height} image")]
    OutOfRange {
        x: usize,
        y: usize,
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("dictionary is empty: the mask leaves no fully known {0}x{0} window")]
    EmptyDictionary(usize),

    #[error("unknown pixels remain but none borders a known pixel")]
    Unreachable,

    #[error("malformed index file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
