//! Sequence autoencoder: an LSTM encoder whose last hidden state is the
//! codeword, and an LSTM decoder fed that codeword at every timestep with a
//! per-timestep dense output back to the feature width.

use holab_core::dataset::Dataset;
use holab_core::NUM_FEATURES;
use holab_neural::loss::mse_with_grad;
use holab_neural::lstm::LstmInput;
use holab_neural::{Activation, Dense, LstmStack, Params, Tensor2D};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{LossCurve, TrainConfig};
use crate::error::{ModelError, Result};
use crate::model_io::{parse_usize, parse_widths, widths, Architecture, Fields};
use crate::train::{fit, gather_time_major};

pub const DEFAULT_CW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SeqAutoencoder {
    pub encoder: LstmStack,
    pub decoder: LstmStack,
    pub output: Dense,
}

/// Encoder widths end with the codeword length.
#[derive(Debug, Clone, PartialEq)]
pub struct AeShape {
    pub encoder: Vec<usize>,
    pub decoder: Vec<usize>,
}

impl AeShape {
    /// One encoder layer of width `cw` mirrored by one decoder layer.
    pub fn symmetric(cw: usize) -> Self {
        AeShape {
            encoder: vec![cw],
            decoder: vec![cw],
        }
    }

    pub fn cw(&self) -> usize {
        self.encoder.last().copied().unwrap_or(0)
    }
}

impl SeqAutoencoder {
    pub fn new(input: usize, shape: &AeShape, seed: u64) -> Self {
        assert!(
            !shape.encoder.is_empty() && !shape.decoder.is_empty(),
            "encoder and decoder need layers"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = LstmStack::new(input, &shape.encoder, &mut rng);
        let decoder = LstmStack::new(shape.cw(), &shape.decoder, &mut rng);
        let output = Dense::new(
            *shape.decoder.last().unwrap(),
            input,
            Activation::Identity,
            &mut rng,
        );
        SeqAutoencoder {
            encoder,
            decoder,
            output,
        }
    }

    pub fn cw(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn shape(&self) -> AeShape {
        AeShape {
            encoder: self.encoder.hidden_sizes(),
            decoder: self.decoder.hidden_sizes(),
        }
    }

    /// Codewords (`batch x cw`) of a time-major batch.
    pub fn encode_batch(&self, x: Tensor2D, steps: usize) -> Result<Tensor2D> {
        Ok(self
            .encoder
            .forward_last(LstmInput::Sequence { steps, x })?
            .0)
    }

    /// Reconstruction of a time-major batch, same layout as the input.
    pub fn reconstruct_batch(&self, x: Tensor2D, steps: usize) -> Result<Tensor2D> {
        let code = self.encode_batch(x, steps)?;
        let dec = self
            .decoder
            .forward(LstmInput::Repeated { steps, x: code })?;
        Ok(self.output.infer(dec.last().unwrap().hidden())?)
    }

    /// Mean squared reconstruction error, gradient into `grad`.
    pub fn loss_grad(&self, x: Tensor2D, steps: usize, grad: &mut SeqAutoencoder) -> Result<f64> {
        let (code, enc) = self.encoder.forward_last(LstmInput::Sequence {
            steps,
            x: x.clone(),
        })?;
        let dec = self
            .decoder
            .forward(LstmInput::Repeated { steps, x: code })?;
        let (y, oc) = self.output.forward(dec.last().unwrap().hidden())?;
        let (loss, dy) = mse_with_grad(y.as_slice(), x.as_slice())?;
        let dy = Tensor2D::from_vec(y.rows(), y.cols(), dy)?;
        let dh = self.output.backward(&oc, &dy, &mut grad.output)?;
        let dcode = self.decoder.backward(&dec, dh, &mut grad.decoder)?;
        self.encoder
            .backward_last(&enc, &dcode, &mut grad.encoder)?;
        Ok(loss)
    }

    pub fn reconstruction_mse(&self, x: Tensor2D, steps: usize) -> Result<f64> {
        let y = self.reconstruct_batch(x.clone(), steps)?;
        Ok(holab_neural::loss::mse(y.as_slice(), x.as_slice())?)
    }
}

/// Codeword of one window-major sequence.
pub fn encode(ae: &SeqAutoencoder, seq: &[f64], windows: usize) -> Result<Vec<f64>> {
    if seq.len() != windows * ae.encoder.input_dim() {
        return Err(holab_neural::NeuralError::Shape(format!(
            "sequence of {} values is not {windows} windows of {}",
            seq.len(),
            ae.encoder.input_dim()
        ))
        .into());
    }
    let x = gather_time_major(&[seq], windows, ae.encoder.input_dim());
    Ok(ae.encode_batch(x, windows)?.into_vec())
}

/// Codewords of every sequence, one row each.
pub fn encode_dataset(ae: &SeqAutoencoder, dataset: &Dataset) -> Result<Tensor2D> {
    let m = dataset.windows;
    let cw = ae.cw();
    let mut out = Vec::with_capacity(dataset.len() * cw);
    for chunk in dataset.sequences.chunks(64) {
        let s: Vec<&[f64]> = chunk.iter().map(|s| s.features.as_slice()).collect();
        out.extend(
            ae.encode_batch(gather_time_major(&s, m, NUM_FEATURES), m)?
                .into_vec(),
        );
    }
    Ok(Tensor2D::from_vec(dataset.len(), cw, out)?)
}

/// Mean reconstruction MSE over a dataset.
pub fn autoencoder_mse(ae: &SeqAutoencoder, dataset: &Dataset) -> Result<f64> {
    let m = dataset.windows;
    let mut total = 0.0;
    for chunk in dataset.sequences.chunks(64) {
        let s: Vec<&[f64]> = chunk.iter().map(|s| s.features.as_slice()).collect();
        total +=
            ae.reconstruction_mse(gather_time_major(&s, m, NUM_FEATURES), m)? * chunk.len() as f64;
    }
    Ok(total / dataset.len().max(1) as f64)
}

impl Params for SeqAutoencoder {
    fn tensors(&self) -> Vec<&Tensor2D> {
        let mut t = self.encoder.tensors();
        t.extend(self.decoder.tensors());
        t.extend(self.output.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.decoder.tensors_mut());
        t.extend(self.output.tensors_mut());
        t
    }
}

impl Architecture for SeqAutoencoder {
    const KIND: &'static str = "seq-autoencoder";

    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("input", self.encoder.input_dim().to_string()),
            ("encoder", widths(&self.encoder.hidden_sizes())),
            ("decoder", widths(&self.decoder.hidden_sizes())),
        ]
    }

    fn blank(fields: &Fields) -> Result<Self> {
        let input = parse_usize(fields, "input")?;
        let shape = AeShape {
            encoder: parse_widths(fields, "encoder")?,
            decoder: parse_widths(fields, "decoder")?,
        };
        if input == 0
            || shape.encoder.is_empty()
            || shape.decoder.is_empty()
            || shape.encoder.contains(&0)
            || shape.decoder.contains(&0)
        {
            return Err(ModelError::Checkpoint(
                "degenerate autoencoder shape".into(),
            ));
        }
        Ok(SeqAutoencoder::new(input, &shape, 0))
    }
}

/// Unsupervised reconstruction training on a normalized dataset.
pub fn train_autoencoder(
    dataset: &Dataset,
    shape: &AeShape,
    cfg: &TrainConfig,
) -> Result<(SeqAutoencoder, LossCurve)> {
    if dataset.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let m = dataset.windows;
    let cw = shape.cw();
    if cw == 0 || cw >= m * NUM_FEATURES {
        return Err(ModelError::Config {
            field: "cw",
            reason: format!("codeword length {cw} must lie in [1, {})", m * NUM_FEATURES),
        });
    }
    let seqs: Vec<&[f64]> = dataset
        .sequences
        .iter()
        .map(|s| s.features.as_slice())
        .collect();
    let batch = |idx: &[usize]| {
        let s: Vec<&[f64]> = idx.iter().map(|&i| seqs[i]).collect();
        gather_time_major(&s, m, NUM_FEATURES)
    };
    let model = SeqAutoencoder::new(NUM_FEATURES, shape, cfg.seed);
    fit(
        model,
        dataset.len(),
        cfg,
        |model, idx, grad| model.loss_grad(batch(idx), m, grad),
        |model, idx| model.reconstruction_mse(batch(idx), m),
    )
}
