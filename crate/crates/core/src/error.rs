use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("policy contract violation at t={time}: {detail}")]
    Contract { time: f64, detail: String },

    #[error("deadlock at t={time}: {unfinished} unfinished jobs but no positive rate")]
    Deadlock { time: f64, unfinished: usize },

    #[error("invalid state: {0}")]
    State(String),

    #[error("numeric failure in {what}: {detail}")]
    Numeric { what: String, detail: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("enumeration needs {required} outcomes, cap is {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("trial {trial} (stream key {key:#018x}) failed: {source}")]
    Trial {
        trial: u64,
        key: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
