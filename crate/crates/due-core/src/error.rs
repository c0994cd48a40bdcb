use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("resample step {to_step} is not a multiple of source step {from_step}")]
    StepMismatch { from_step: u32, to_step: u32 },

    #[error("diary error for person '{person}' on {day}: {reason}")]
    Diary {
        person: String,
        day: String,
        reason: String,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("profile error: {0}")]
    Profile(String),

    #[error("fridge learning failed: {0}")]
    Fridge(String),

    #[error("polar latitude {0} not supported")]
    PolarLatitude(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
