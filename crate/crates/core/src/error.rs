use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("cell {0} is not present in the radio sample list")]
    UnknownCell(u32),

    #[error("trace error: {0}")]
    Trace(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("corrupt dataset file: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        field,
        reason: reason.into(),
    }
}
