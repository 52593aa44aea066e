//! Uniform access to a model's trainable tensors.

use crate::tensor::Tensor2D;

/// A model whose trainable tensors can be enumerated in a fixed order.
///
/// Gradients use the same type: a zeroed copy of the model whose tensors hold
/// accumulated derivatives in the same order.
pub trait Params {
    fn tensors(&self) -> Vec<&Tensor2D>;
    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D>;

    fn zeroed(&self) -> Self
    where
        Self: Clone + Sized,
    {
        let mut z = self.clone();
        z.zero();
        z
    }

    fn zero(&mut self) {
        self.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Order-sensitive FNV-1a hash over parameter bit patterns.
    fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for t in self.tensors() {
            for x in t.as_slice() {
                for byte in x.to_bits().to_le_bytes() {
                    h ^= byte as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }
}

impl<T: Params> Params for Vec<T> {
    fn tensors(&self) -> Vec<&Tensor2D> {
        self.iter().flat_map(|p| p.tensors()).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
        self.iter_mut().flat_map(|p| p.tensors_mut()).collect()
    }
}
