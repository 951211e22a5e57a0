use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("code construction failed: {0}")]
    Construction(String),

    #[error("field construction failed: {0}")]
    Field(String),

    /// Exact weight enumeration would visit more codewords than allowed.
    #[error(
        "enumerating 2^{dimension} codewords exceeds the cap of {cap}; use the binomial approximation"
    )]
    EnumerationCap { dimension: usize, cap: u64 },

    #[error("malformed code document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
