use thiserror::Error;

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid training option `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("input is not normalized: value {value} at position {index} lies outside [-0.5, 1.5]")]
    Unnormalized { value: f64, index: usize },

    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Neural(#[from] holab_neural::NeuralError),

    #[error(transparent)]
    Data(#[from] holab_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ModelError>;
