//! Download-time predictors for handover target selection.
//!
//! - [`regressor`]: many-to-one LSTM stack with a dense head
//! - [`autoencoder`] + [`mlp`]: sequence autoencoder whose frozen codewords
//!   feed a multilayer perceptron
//! - [`search`]: grid search ranked by validation MSE
//!
//! Labels are trained in units of the 40 s horizon; [`predict`] converts
//! outputs back to seconds.

pub mod autoencoder;
pub mod config;
pub mod error;
pub mod mlp;
pub mod model_io;
pub mod predict;
pub mod regressor;
pub mod search;
pub mod train;

pub use autoencoder::{encode, encode_dataset, train_autoencoder, AeShape, SeqAutoencoder};
pub use config::{median_decreasing, LossCurve, Selection, TrainConfig};
pub use error::{ModelError, Result};
pub use mlp::{train_mlp, MlpRegressor};
pub use model_io::{load_model, save_model};
pub use predict::{predict_download_time, Predictor};
pub use regressor::{train_lstm_regressor, LstmRegressor};

/// Label scale: download times are divided by the simulation horizon.
pub const LABEL_SCALE: f64 = holab_core::dataset::LABEL_HORIZON;
