use thiserror::Error;

/// Errors produced by code construction, encoding, indexing and decoding.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Unsupported code family or out-of-range parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value or a stream does not fit the representable range.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A bit string is not a codeword of the code.
    #[error("invalid codeword {0}")]
    InvalidCodeword(String),

    /// A start predicate was asked to decide on a window that is too short.
    #[error("insufficient context: need more than {0} bits to decide")]
    InsufficientContext(usize),

    /// An index or byte position is outside the valid range.
    #[error("index {index} out of bounds (len {len})")]
    OutOfBounds { index: u64, len: u64 },

    /// A skip count does not address a codeword start within the byte.
    #[error("phase error: skip {skip} but only {starts} codeword starts in the byte")]
    Phase { skip: usize, starts: usize },

    /// Entropy of an empty sequence.
    #[error("entropy undefined for empty input")]
    UndefinedEntropy,

    /// Malformed stream, index or container.
    #[error("corruption: {0}")]
    Corruption(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
