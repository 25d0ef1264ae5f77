use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("grid too coarse: interval [{s}, {t}] cannot hold 2^{levels} subintervals")]
    GridTooCoarse { s: usize, t: usize, levels: u32 },

    #[error("time arguments out of order: {0}")]
    OutOfOrder(String),

    #[error("non-finite or exploding state at step {step} (norm {norm:e})")]
    BlowUp { step: usize, norm: f64 },

    #[error("rate fit needs at least {needed} positive points, got {got}")]
    NotEnoughPoints { needed: usize, got: usize },

    #[error("nonpositive value {value} at index {index} in log-log data")]
    NonPositive { index: usize, value: f64 },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
