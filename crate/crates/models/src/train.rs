//! Mini-batch Adam loop shared by all three models.

use holab_neural::{Adam, Params, Tensor2D};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{LossCurve, TrainConfig};
use crate::error::{ModelError, Result};

/// Sample indices split into training and validation parts. With a positive
/// fraction and at least two samples, both parts are non-empty.
pub fn split_indices(n: usize, validation_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut n_val = (n as f64 * validation_fraction).round() as usize;
    if validation_fraction > 0.0 && n >= 2 {
        n_val = n_val.clamp(1, n - 1);
    } else {
        n_val = n_val.min(n);
    }
    let val = idx.split_off(n - n_val);
    (idx, val)
}

/// Rows `t * batch + b` hold window `t` of sequence `b`.
pub fn gather_time_major(seqs: &[&[f64]], windows: usize, width: usize) -> Tensor2D {
    let bsz = seqs.len();
    let mut x = Tensor2D::zeros(windows * bsz, width);
    for (b, s) in seqs.iter().enumerate() {
        debug_assert_eq!(s.len(), windows * width);
        for t in 0..windows {
            x.row_mut(t * bsz + b)
                .copy_from_slice(&s[t * width..(t + 1) * width]);
        }
    }
    x
}

/// Inverse of [`gather_time_major`] for one sample.
pub fn scatter_sample(x: &Tensor2D, bsz: usize, b: usize) -> Vec<f64> {
    let windows = x.rows() / bsz;
    let mut out = Vec::with_capacity(windows * x.cols());
    for t in 0..windows {
        out.extend_from_slice(x.row(t * bsz + b));
    }
    out
}

/// Size-weighted mean of `eval` over `indices` in chunks of `chunk`.
pub fn chunked_mean<M>(
    model: &M,
    indices: &[usize],
    chunk: usize,
    eval: &impl Fn(&M, &[usize]) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for c in indices.chunks(chunk.max(1)) {
        total += eval(model, c)? * c.len() as f64;
    }
    Ok(total / indices.len().max(1) as f64)
}

/// Trains `model` on samples `0..n`.
///
/// `loss_grad` returns the batch-mean loss and accumulates its gradient into
/// the zeroed gradient model; `eval` returns the batch-mean loss only. The
/// returned model is the one with the lowest validation loss seen after any
/// epoch (training loss when there is no validation split).
pub fn fit<M, G, E>(
    mut model: M,
    n: usize,
    cfg: &TrainConfig,
    loss_grad: G,
    eval: E,
) -> Result<(M, LossCurve)>
where
    M: Params + Clone,
    G: Fn(&M, &[usize], &mut M) -> Result<f64>,
    E: Fn(&M, &[usize]) -> Result<f64>,
{
    cfg.validate()?;
    if n == 0 {
        return Err(ModelError::EmptyDataset);
    }
    let (mut train, val) = split_indices(n, cfg.validation_fraction, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5e_ed0f_ba7c);
    let mut opt = Adam::new(&model, cfg.lr);
    let mut grad = model.zeroed();
    let mut curve = LossCurve::default();
    let mut best: Option<(f64, M)> = None;
    for _ in 0..cfg.epochs {
        train.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in train.chunks(cfg.batch_size) {
            grad.zero();
            let loss = loss_grad(&model, batch, &mut grad)?;
            if !loss.is_finite() {
                return Err(holab_neural::NeuralError::NonFinite("training loss").into());
            }
            total += loss * batch.len() as f64;
            opt.update(&mut model, &grad)?;
        }
        curve.train.push(total / train.len() as f64);
        let score = if val.is_empty() {
            chunked_mean(&model, &train, cfg.batch_size.max(64), &eval)?
        } else {
            let v = chunked_mean(&model, &val, cfg.batch_size.max(64), &eval)?;
            curve.val.push(v);
            v
        };
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, model.clone()));
        }
    }
    let (_, best) = best.expect("at least one epoch");
    Ok((best, curve))
}
