//! Many-to-one LSTM regressor: LSTM stack, then a dense head to one output.

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
use crate::train::{chunked_mean, fit, gather_time_major};
use crate::LABEL_SCALE;

pub const DEFAULT_LSTM_HIDDEN: [usize; 3] = [84, 62, 42];

#[derive(Debug, Clone, PartialEq)]
pub struct LstmRegressor {
    pub stack: LstmStack,
    pub head: Dense,
}

impl LstmRegressor {
    pub fn new(input: usize, hidden: &[usize], seed: u64) -> Self {
        assert!(
            !hidden.is_empty(),
            "regressor needs at least one LSTM layer"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stack = LstmStack::new(input, hidden, &mut rng);
        let head = Dense::new(*hidden.last().unwrap(), 1, Activation::Identity, &mut rng);
        LstmRegressor { stack, head }
    }

    pub fn hidden(&self) -> Vec<usize> {
        self.stack.hidden_sizes()
    }

    /// Scaled outputs for a time-major batch.
    pub fn forward_batch(&self, x: Tensor2D, steps: usize) -> Result<Vec<f64>> {
        let (last, _) = self.stack.forward_last(LstmInput::Sequence { steps, x })?;
        Ok(self.head.infer(&last)?.into_vec())
    }

    /// Batch-mean squared error against scaled targets, gradient into `grad`.
    pub fn loss_grad(
        &self,
        x: Tensor2D,
        steps: usize,
        targets: &[f64],
        grad: &mut LstmRegressor,
    ) -> Result<f64> {
        let (last, caches) = self.stack.forward_last(LstmInput::Sequence { steps, x })?;
        let (y, hc) = self.head.forward(&last)?;
        let (loss, dy) = mse_with_grad(y.as_slice(), targets)?;
        let dy = Tensor2D::from_vec(y.rows(), 1, dy)?;
        let dlast = self.head.backward(&hc, &dy, &mut grad.head)?;
        self.stack.backward_last(&caches, &dlast, &mut grad.stack)?;
        Ok(loss)
    }

    /// Scaled outputs for window-major sequences.
    pub fn predict_scaled(&self, seqs: &[&[f64]], windows: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(seqs.len());
        for chunk in seqs.chunks(64) {
            out.extend(
                self.forward_batch(gather_time_major(chunk, windows, NUM_FEATURES), windows)?,
            );
        }
        Ok(out)
    }
}

impl Params for LstmRegressor {
    fn tensors(&self) -> Vec<&Tensor2D> {
        let mut t = self.stack.tensors();
        t.extend(self.head.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
        let mut t = self.stack.tensors_mut();
        t.extend(self.head.tensors_mut());
        t
    }
}

impl Architecture for LstmRegressor {
    const KIND: &'static str = "lstm-regressor";

    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("input", self.stack.input_dim().to_string()),
            ("hidden", widths(&self.hidden())),
        ]
    }

    fn blank(fields: &Fields) -> Result<Self> {
        let input = parse_usize(fields, "input")?;
        let hidden = parse_widths(fields, "hidden")?;
        if input == 0 || hidden.is_empty() || hidden.contains(&0) {
            return Err(ModelError::Checkpoint("degenerate regressor shape".into()));
        }
        Ok(LstmRegressor::new(input, &hidden, 0))
    }
}

/// Trains on a normalized dataset; labels are divided by the horizon.
pub fn train_lstm_regressor(
    dataset: &Dataset,
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<(LstmRegressor, LossCurve)> {
    if dataset.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let m = dataset.windows;
    let seqs: Vec<&[f64]> = dataset
        .sequences
        .iter()
        .map(|s| s.features.as_slice())
        .collect();
    let targets: Vec<f64> = dataset
        .sequences
        .iter()
        .map(|s| s.label / LABEL_SCALE)
        .collect();
    let model = LstmRegressor::new(NUM_FEATURES, hidden, cfg.seed);
    let batch = |idx: &[usize]| {
        let s: Vec<&[f64]> = idx.iter().map(|&i| seqs[i]).collect();
        let t: Vec<f64> = idx.iter().map(|&i| targets[i]).collect();
        (gather_time_major(&s, m, NUM_FEATURES), t)
    };
    fit(
        model,
        dataset.len(),
        cfg,
        |model, idx, grad| {
            let (x, t) = batch(idx);
            model.loss_grad(x, m, &t, grad)
        },
        |model, idx| {
            let (x, t) = batch(idx);
            Ok(holab_neural::loss::mse(&model.forward_batch(x, m)?, &t)?)
        },
    )
}

/// Mean squared error of scaled predictions over a normalized dataset.
pub fn regressor_mse(model: &LstmRegressor, dataset: &Dataset) -> Result<f64> {
    let m = dataset.windows;
    let idx: Vec<usize> = (0..dataset.len()).collect();
    chunked_mean(model, &idx, 64, &|model: &LstmRegressor, idx: &[usize]| {
        let s: Vec<&[f64]> = idx
            .iter()
            .map(|&i| dataset.sequences[i].features.as_slice())
            .collect();
        let t: Vec<f64> = idx
            .iter()
            .map(|&i| dataset.sequences[i].label / LABEL_SCALE)
            .collect();
        Ok(holab_neural::loss::mse(
            &model.forward_batch(gather_time_major(&s, m, NUM_FEATURES), m)?,
            &t,
        )?)
    })
}
