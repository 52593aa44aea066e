//! Multilayer perceptron on codewords: relu hidden layers, identity output.

use holab_neural::loss::mse_with_grad;
use holab_neural::{Activation, Dense, Params, Tensor2D};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{LossCurve, TrainConfig};
use crate::error::{ModelError, Result};
use crate::model_io::{parse_usize, parse_widths, widths, Architecture, Fields};
use crate::train::fit;
use crate::LABEL_SCALE;

pub const DEFAULT_MLP_HIDDEN: [usize; 2] = [80, 40];

#[derive(Debug, Clone, PartialEq)]
pub struct MlpRegressor {
    pub layers: Vec<Dense>,
}

impl MlpRegressor {
    pub fn new(input: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut d = input;
        for &h in hidden {
            layers.push(Dense::new(d, h, Activation::Relu, &mut rng));
            d = h;
        }
        layers.push(Dense::new(d, 1, Activation::Identity, &mut rng));
        MlpRegressor { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn hidden(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(Dense::output_dim)
            .collect()
    }

    /// Scaled outputs, one per row of `x`.
    pub fn forward(&self, x: &Tensor2D) -> Result<Vec<f64>> {
        let mut y = x.clone();
        for l in &self.layers {
            y = l.infer(&y)?;
        }
        Ok(y.into_vec())
    }

    pub fn loss_grad(&self, x: &Tensor2D, targets: &[f64], grad: &mut MlpRegressor) -> Result<f64> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut y = x.clone();
        for l in &self.layers {
            let (next, c) = l.forward(&y)?;
            caches.push(c);
            y = next;
        }
        let (loss, dy) = mse_with_grad(y.as_slice(), targets)?;
        let mut d = Tensor2D::from_vec(y.rows(), 1, dy)?;
        for (i, l) in self.layers.iter().enumerate().rev() {
            d = l.backward(&caches[i], &d, &mut grad.layers[i])?;
        }
        Ok(loss)
    }
}

impl Params for MlpRegressor {
    fn tensors(&self) -> Vec<&Tensor2D> {
        self.layers.tensors()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
        self.layers.tensors_mut()
    }
}

impl Architecture for MlpRegressor {
    const KIND: &'static str = "mlp-regressor";

    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("input", self.input_dim().to_string()),
            ("hidden", widths(&self.hidden())),
        ]
    }

    fn blank(fields: &Fields) -> Result<Self> {
        let input = parse_usize(fields, "input")?;
        let hidden = parse_widths(fields, "hidden")?;
        if input == 0 || hidden.contains(&0) {
            return Err(ModelError::Checkpoint("degenerate MLP shape".into()));
        }
        Ok(MlpRegressor::new(input, &hidden, 0))
    }
}

fn rows(x: &Tensor2D, idx: &[usize]) -> Tensor2D {
    let mut out = Tensor2D::zeros(idx.len(), x.cols());
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).copy_from_slice(x.row(i));
    }
    out
}

/// Supervised regression from codewords to download times in seconds.
pub fn train_mlp(
    codewords: &Tensor2D,
    labels: &[f64],
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpRegressor, LossCurve)> {
    if codewords.rows() == 0 {
        return Err(ModelError::EmptyDataset);
    }
    if labels.len() != codewords.rows() {
        return Err(holab_neural::NeuralError::Shape(format!(
            "{} labels for {} codewords",
            labels.len(),
            codewords.rows()
        ))
        .into());
    }
    let targets: Vec<f64> = labels.iter().map(|l| l / LABEL_SCALE).collect();
    let pick = |idx: &[usize]| idx.iter().map(|&i| targets[i]).collect::<Vec<f64>>();
    let model = MlpRegressor::new(codewords.cols(), hidden, cfg.seed);
    fit(
        model,
        codewords.rows(),
        cfg,
        |m, idx, g| m.loss_grad(&rows(codewords, idx), &pick(idx), g),
        |m, idx| {
            Ok(holab_neural::loss::mse(
                &m.forward(&rows(codewords, idx))?,
                &pick(idx),
            )?)
        },
    )
}
