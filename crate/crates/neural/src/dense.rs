//! Fully connected layer `y = act(x · Wᵀ + b)` over a batch of rows.

use rand::Rng;

use crate::error::{shape_err, Result};
use crate::params::Params;
use crate::tensor::{gemm, Tensor2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// out x in
    pub w: Tensor2D,
    /// 1 x out
    pub b: Tensor2D,
    pub activation: Activation,
}

/// Forward values needed by [`Dense::backward`].
#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Tensor2D,
    output: Tensor2D,
}

impl Dense {
    /// Weights uniform in ±1/√in, zero bias.
    pub fn new<R: Rng>(input: usize, output: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (input as f64).sqrt();
        Dense {
            w: Tensor2D::uniform(output, input, bound, rng),
            b: Tensor2D::zeros(1, output),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn infer(&self, x: &Tensor2D) -> Result<Tensor2D> {
        if x.cols() != self.input_dim() {
            return Err(shape_err(format!(
                "dense input has {} columns, layer expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        let mut y = Tensor2D::zeros(x.rows(), self.output_dim());
        gemm(1.0, x.view(), self.w.view().t(), 0.0, y.view_mut());
        y.add_row_broadcast(self.b.as_slice());
        if self.activation == Activation::Relu {
            y.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
        }
        Ok(y)
    }

    pub fn forward(&self, x: &Tensor2D) -> Result<(Tensor2D, DenseCache)> {
        let y = self.infer(x)?;
        Ok((
            y.clone(),
            DenseCache {
                input: x.clone(),
                output: y,
            },
        ))
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    pub fn backward(
        &self,
        cache: &DenseCache,
        dy: &Tensor2D,
        grad: &mut Dense,
    ) -> Result<Tensor2D> {
        if dy.shape() != cache.output.shape() {
            return Err(shape_err(format!(
                "upstream gradient {:?} vs layer output {:?}",
                dy.shape(),
                cache.output.shape()
            )));
        }
        let mut dz = dy.clone();
        if self.activation == Activation::Relu {
            dz.as_mut_slice()
                .iter_mut()
                .zip(cache.output.as_slice())
                .for_each(|(d, &y)| {
                    if y <= 0.0 {
                        *d = 0.0
                    }
                });
        }
        gemm(
            1.0,
            dz.view().t(),
            cache.input.view(),
            1.0,
            grad.w.view_mut(),
        );
        dz.col_sums_into(grad.b.as_mut_slice());
        let mut dx = Tensor2D::zeros(dz.rows(), self.input_dim());
        gemm(1.0, dz.view(), self.w.view(), 0.0, dx.view_mut());
        Ok(dx)
    }
}

impl Params for Dense {
    fn tensors(&self) -> Vec<&Tensor2D> {
        vec![&self.w, &self.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
        vec![&mut self.w, &mut self.b]
    }
}
