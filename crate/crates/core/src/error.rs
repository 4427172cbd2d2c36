use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid input distribution: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// An information density was requested at an output symbol that never
    /// occurs under the joint law.
    #[error("output symbol {y} has zero probability under the input distribution")]
    ZeroOutputProbability { y: usize },

    #[error(
        "codebook of {msg_count} codewords x {n} symbols = {symbols} symbols exceeds the cap of {cap}"
    )]
    CodebookTooLarge {
        msg_count: u64,
        n: usize,
        symbols: u128,
        cap: u64,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
