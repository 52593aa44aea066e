//! Bias-corrected Adam.

use crate::error::{shape_err, Result};
use crate::params::Params;
use crate::tensor::Tensor2D;

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Tensor2D>,
    v: Vec<Tensor2D>,
}

impl Adam {
    /// Zeroed moment buffers shaped like `model`'s tensors.
    pub fn new<P: Params>(model: &P, lr: f64) -> Self {
        let m: Vec<Tensor2D> = model.tensors().iter().map(|t| t.zeros_like()).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            v: m.clone(),
            m,
        }
    }

    pub fn update<P: Params>(&mut self, model: &mut P, grads: &P) -> Result<()> {
        let params = model.tensors_mut();
        let grads = grads.tensors();
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(shape_err(format!(
                "optimizer tracks {} tensors, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(&grads).zip(&self.m) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(shape_err(format!(
                    "parameter {:?}, gradient {:?}, moment {:?}",
                    p.shape(),
                    g.shape(),
                    m.shape()
                )));
            }
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            let it = p
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice());
            for (((p, &g), m), v) in it {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let mhat = *m / bc1;
                let vhat = *v / bc2;
                *p -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone)]
    struct Two(Tensor2D, Tensor2D);

    impl Params for Two {
        fn tensors(&self) -> Vec<&Tensor2D> {
            vec![&self.0, &self.1]
        }
        fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
            vec![&mut self.0, &mut self.1]
        }
    }

    fn model() -> Two {
        Two(
            Tensor2D::from_vec(1, 2, vec![0.5, -0.5]).unwrap(),
            Tensor2D::from_vec(1, 1, vec![2.0]).unwrap(),
        )
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut p = model();
        let mut opt = Adam::new(&p, 1e-3);
        let g = p.zeroed();
        opt.update(&mut p, &g).unwrap();
        assert_eq!(p.0.as_slice(), &[0.5, -0.5]);
        assert_eq!(p.1.as_slice(), &[2.0]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = model();
        let mut g = p.zeroed();
        g.1.as_mut_slice()[0] = 1.0;
        let mut opt = Adam::new(&p, 1e-3);
        opt.update(&mut p, &g).unwrap();
        let expected = 2.0 - 1e-3 / (1.0 + 1e-8);
        assert!((p.1.as_slice()[0] - expected).abs() < 1e-15);
        // the other tensor saw a zero gradient
        assert_eq!(p.0.as_slice(), &[0.5, -0.5]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = model();
        let mut opt = Adam::new(&p, 1e-3);
        let mut g = p.zeroed();
        g.0 = Tensor2D::zeros(2, 1);
        assert!(opt.update(&mut p, &g).is_err());
    }
}
