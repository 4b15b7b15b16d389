use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter range error: {0}")]
    ParamRange(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("singular transition: a = 0 has no ZOH inverse, use b_bar = b * dt")]
    SingularTransition,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("tape already consumed by a previous backward pass")]
    TapeConsumed,

    #[error("argument error: {0}")]
    Argument(String),

    #[error("non-finite gradient in `{param}` at index {index}")]
    NonFiniteGradient { param: String, index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
