use thiserror::Error;

#[derive(Error, Debug)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("corrupt checkpoint: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NeuralError>;

pub(crate) fn shape_err(msg: impl Into<String>) -> NeuralError {
    NeuralError::Shape(msg.into())
}
