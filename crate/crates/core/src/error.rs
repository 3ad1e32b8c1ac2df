use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {n} exceeds the cap of {cap}")]
    DimensionTooLarge { n: u32, cap: u32 },

    #[error("function is constant")]
    ConstantFunction,

    #[error("sample budget exhausted on slice {r}: kept {kept} of {wanted} after consuming {consumed} examples")]
    BudgetExhausted {
        r: u32,
        kept: usize,
        wanted: usize,
        consumed: u64,
    },

    #[error("example stream exhausted after {consumed} examples")]
    StreamExhausted { consumed: u64 },

    #[error("rounding loop gave up after {attempts} thresholds (last estimate {last_p})")]
    RoundingBudget { attempts: u32, last_p: f64 },

    #[error("operation requires a truth table")]
    NotTableMode,

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
