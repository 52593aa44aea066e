//! Numerical kernel for the handover predictors: row-major tensors, dense and
//! LSTM layers with exact gradients, Adam, MSE, gradient checking, and
//! checkpoint files.

pub mod adam;
pub mod checkpoint;
pub mod dense;
pub mod error;
pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod params;
pub mod tensor;

pub use adam::Adam;
pub use checkpoint::Checkpoint;
pub use dense::{Activation, Dense};
pub use error::{NeuralError, Result};
pub use lstm::{LstmInput, LstmLayer, LstmStack};
pub use params::Params;
pub use tensor::Tensor2D;
