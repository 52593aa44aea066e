//! Download-time prediction from normalized sequences.

use holab_core::dataset::{CLIP_HIGH, CLIP_LOW};
use holab_core::NUM_FEATURES;
use holab_neural::Tensor2D;

use crate::autoencoder::SeqAutoencoder;
use crate::error::{ModelError, Result};
use crate::mlp::MlpRegressor;
use crate::regressor::LstmRegressor;
use crate::train::gather_time_major;
use crate::LABEL_SCALE;

/// Slack beyond the clip range before input counts as unnormalized.
const RANGE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Lstm(LstmRegressor),
    AeMlp {
        ae: SeqAutoencoder,
        mlp: MlpRegressor,
    },
}

impl Predictor {
    pub fn ae_mlp(ae: SeqAutoencoder, mlp: MlpRegressor) -> Result<Self> {
        if mlp.input_dim() != ae.cw() {
            return Err(holab_neural::NeuralError::Shape(format!(
                "MLP expects {} inputs, autoencoder codeword has {}",
                mlp.input_dim(),
                ae.cw()
            ))
            .into());
        }
        Ok(Predictor::AeMlp { ae, mlp })
    }

    /// Raw model outputs (label scale) for window-major sequences.
    pub fn predict_scaled(&self, seqs: &[&[f64]], windows: usize) -> Result<Vec<f64>> {
        match self {
            Predictor::Lstm(m) => m.predict_scaled(seqs, windows),
            Predictor::AeMlp { ae, mlp } => {
                let mut out = Vec::with_capacity(seqs.len());
                for chunk in seqs.chunks(64) {
                    let code: Tensor2D =
                        ae.encode_batch(gather_time_major(chunk, windows, NUM_FEATURES), windows)?;
                    out.extend(mlp.forward(&code)?);
                }
                Ok(out)
            }
        }
    }

    /// Predicted download times in seconds, each in `(0, 40]`.
    pub fn predict_seconds(&self, seqs: &[&[f64]], windows: usize) -> Result<Vec<f64>> {
        for s in seqs {
            check_normalized(s)?;
        }
        self.predict_scaled(seqs, windows)?
            .into_iter()
            .map(rescale_prediction)
            .collect()
    }
}

/// Rejects input with values outside the normalizer's clip range.
pub fn check_normalized(values: &[f64]) -> Result<()> {
    match values
        .iter()
        .position(|v| !(CLIP_LOW - RANGE_SLACK..=CLIP_HIGH + RANGE_SLACK).contains(v))
    {
        Some(index) => Err(ModelError::Unnormalized {
            value: values[index],
            index,
        }),
        None => Ok(()),
    }
}

/// Scales a raw output by the horizon and clamps it into `(0, 40]`.
pub fn rescale_prediction(raw: f64) -> Result<f64> {
    if !raw.is_finite() {
        return Err(holab_neural::NeuralError::NonFinite("prediction").into());
    }
    Ok((raw * LABEL_SCALE).clamp(f64::MIN_POSITIVE, LABEL_SCALE))
}

pub fn predict_download_time(model: &Predictor, seq: &[f64], windows: usize) -> Result<f64> {
    Ok(model.predict_seconds(&[seq], windows)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale_prediction(0.5).unwrap(), 20.0);
        assert_eq!(rescale_prediction(1.3).unwrap(), 40.0);
        assert_eq!(rescale_prediction(-0.1).unwrap(), f64::MIN_POSITIVE);
        assert!(rescale_prediction(f64::NAN).is_err());
    }

    #[test]
    fn raw_features_are_rejected() {
        assert!(check_normalized(&[0.0, 1.5, -0.5]).is_ok());
        assert!(matches!(
            check_normalized(&[0.2, -95.0]),
            Err(ModelError::Unnormalized { index: 1, .. })
        ));
    }

    #[test]
    fn mismatched_codeword_width_rejected() {
        use crate::autoencoder::AeShape;
        let ae = SeqAutoencoder::new(NUM_FEATURES, &AeShape::symmetric(4), 1);
        assert!(Predictor::ae_mlp(ae.clone(), MlpRegressor::new(5, &[3], 1)).is_err());
        assert!(Predictor::ae_mlp(ae, MlpRegressor::new(4, &[3], 1)).is_ok());
    }
}
