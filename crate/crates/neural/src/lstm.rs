//! LSTM layers with batched full backpropagation through time.
//!
//! Gate order inside the stacked weights is `i, f, g, o`:
//! `i = σ(W_i x + U_i h + b_i)`, `f`, `o` likewise, `g = tanh(·)`,
//! `c = f ⊙ c_prev + i ⊙ g`, `h = o ⊙ tanh(c)`.
//!
//! Batched tensors are time-major: row `t * batch + b` holds timestep `t` of
//! sample `b`, so each timestep is one contiguous block. Every sequence
//! starts from a zero state.

use rand::Rng;

use crate::error::{shape_err, Result};
use crate::params::Params;
use crate::tensor::{gemm, MatMut, MatRef, Tensor2D};

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `tanh` through one `exp`; std `tanh` near zero where the identity cancels.
#[inline]
pub(crate) fn tanh(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.5 {
        return x.tanh();
    }
    let t = 1.0 - 2.0 / ((2.0 * a).exp() + 1.0);
    t.copysign(x)
}

/// Input of one layer for a batch of sequences.
#[derive(Debug, Clone, PartialEq)]
pub enum LstmInput {
    /// `(steps * batch) x d`, time-major.
    Sequence { steps: usize, x: Tensor2D },
    /// `batch x d`, the same vector fed at every one of `steps` timesteps.
    Repeated { steps: usize, x: Tensor2D },
}

impl LstmInput {
    pub fn steps(&self) -> usize {
        match self {
            LstmInput::Sequence { steps, .. } | LstmInput::Repeated { steps, .. } => *steps,
        }
    }

    pub fn batch(&self) -> usize {
        match self {
            LstmInput::Sequence { steps, x } => x.rows().checked_div(*steps).unwrap_or(0),
            LstmInput::Repeated { x, .. } => x.rows(),
        }
    }

    fn data(&self) -> &Tensor2D {
        match self {
            LstmInput::Sequence { x, .. } | LstmInput::Repeated { x, .. } => x,
        }
    }

    pub fn dim(&self) -> usize {
        self.data().cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    /// 4h x in
    pub w: Tensor2D,
    /// 4h x h
    pub u: Tensor2D,
    /// 1 x 4h
    pub b: Tensor2D,
}

/// Forward activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    input: LstmInput,
    /// Post-activation gates, `(steps * batch) x 4h`.
    gates: Tensor2D,
    c: Tensor2D,
    /// `tanh(c)`
    tc: Tensor2D,
    h: Tensor2D,
}

impl LstmCache {
    /// Hidden states of every timestep, `(steps * batch) x h`, time-major.
    pub fn hidden(&self) -> &Tensor2D {
        &self.h
    }

    pub fn batch(&self) -> usize {
        self.input.batch()
    }

    pub fn steps(&self) -> usize {
        self.input.steps()
    }

    /// Last-timestep hidden state of every sample, `batch x h`.
    pub fn last_hidden(&self) -> Tensor2D {
        let (bsz, m, h) = (self.batch(), self.steps(), self.h.cols());
        let data = self.h.as_slice()[(m - 1) * bsz * h..].to_vec();
        Tensor2D::from_vec(bsz, h, data).expect("last block shape")
    }
}

impl LstmLayer {
    /// Weights uniform in ±1/√fan_in, forget bias 1, other biases 0.
    pub fn new<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let w = Tensor2D::uniform(4 * hidden, input, 1.0 / (input as f64).sqrt(), rng);
        let u = Tensor2D::uniform(4 * hidden, hidden, 1.0 / (hidden as f64).sqrt(), rng);
        let mut b = Tensor2D::zeros(1, 4 * hidden);
        b.as_mut_slice()[hidden..2 * hidden].fill(1.0);
        LstmLayer { w, u, b }
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.u.cols()
    }

    /// One step for a single sample; returns `(h, c)`.
    pub fn cell_step(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let hd = self.hidden_dim();
        if x.len() != self.input_dim() || h_prev.len() != hd || c_prev.len() != hd {
            return Err(shape_err(format!(
                "cell step got x {}, h {}, c {} for layer {}->{hd}",
                x.len(),
                h_prev.len(),
                c_prev.len(),
                self.input_dim()
            )));
        }
        let mut z = self.b.as_slice().to_vec();
        for (r, zr) in z.iter_mut().enumerate() {
            *zr += dot(self.w.row(r), x) + dot(self.u.row(r), h_prev);
        }
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        for j in 0..hd {
            let (i, f, g, o) = (
                sigmoid(z[j]),
                sigmoid(z[hd + j]),
                z[2 * hd + j].tanh(),
                sigmoid(z[3 * hd + j]),
            );
            c[j] = f * c_prev[j] + i * g;
            h[j] = o * c[j].tanh();
        }
        Ok((h, c))
    }

    pub fn forward(&self, input: LstmInput) -> Result<LstmCache> {
        let hd = self.hidden_dim();
        let g4 = 4 * hd;
        let (bsz, m) = (input.batch(), input.steps());
        if m == 0 {
            return Err(shape_err("sequence has no timesteps"));
        }
        if input.dim() != self.input_dim() {
            return Err(shape_err(format!(
                "layer expects input width {}, got {}",
                self.input_dim(),
                input.dim()
            )));
        }
        if let LstmInput::Sequence { x, .. } = &input {
            if x.rows() != bsz * m {
                return Err(shape_err(format!(
                    "{} rows is not a multiple of {m} steps",
                    x.rows()
                )));
            }
        }
        let x = input.data();
        let rows = bsz * m;
        let mut gates = Tensor2D::zeros(rows, g4);
        match &input {
            LstmInput::Sequence { .. } => {
                gemm(1.0, x.view(), self.w.view().t(), 0.0, gates.view_mut());
                gates.add_row_broadcast(self.b.as_slice());
            }
            LstmInput::Repeated { .. } => {
                let mut proj = Tensor2D::zeros(bsz, g4);
                gemm(1.0, x.view(), self.w.view().t(), 0.0, proj.view_mut());
                proj.add_row_broadcast(self.b.as_slice());
                for block in gates.as_mut_slice().chunks_mut(bsz * g4) {
                    block.copy_from_slice(proj.as_slice());
                }
            }
        }

        let mut c = Tensor2D::zeros(rows, hd);
        let mut tc = Tensor2D::zeros(rows, hd);
        let mut h = Tensor2D::zeros(rows, hd);
        let blk = bsz * hd;
        for t in 0..m {
            let zt = &mut gates.as_mut_slice()[t * bsz * g4..(t + 1) * bsz * g4];
            if t > 0 {
                let hp = MatRef::new(&h.as_slice()[(t - 1) * blk..t * blk], bsz, hd, hd, 1);
                gemm(
                    1.0,
                    hp,
                    self.u.view().t(),
                    1.0,
                    MatMut::new(zt, bsz, g4, g4, 1),
                );
            }
            let (c_done, c_rest) = c.as_mut_slice().split_at_mut(t * blk);
            let c_prev = if t > 0 {
                Some(&c_done[(t - 1) * blk..])
            } else {
                None
            };
            let c_cur = &mut c_rest[..blk];
            let tc_cur = &mut tc.as_mut_slice()[t * blk..(t + 1) * blk];
            let h_cur = &mut h.as_mut_slice()[t * blk..(t + 1) * blk];
            for b in 0..bsz {
                let z = &mut zt[b * g4..(b + 1) * g4];
                let (ifg, o) = z.split_at_mut(3 * hd);
                let (if_, g) = ifg.split_at_mut(2 * hd);
                if_.iter_mut().for_each(|v| *v = sigmoid(*v));
                g.iter_mut().for_each(|v| *v = tanh(*v));
                o.iter_mut().for_each(|v| *v = sigmoid(*v));
                let (i, f) = if_.split_at(hd);
                let cc = &mut c_cur[b * hd..(b + 1) * hd];
                match c_prev {
                    Some(cp) => {
                        let cp = &cp[b * hd..(b + 1) * hd];
                        for j in 0..hd {
                            cc[j] = f[j] * cp[j] + i[j] * g[j];
                        }
                    }
                    None => {
                        for j in 0..hd {
                            cc[j] = i[j] * g[j];
                        }
                    }
                }
                let tcb = &mut tc_cur[b * hd..(b + 1) * hd];
                let hb = &mut h_cur[b * hd..(b + 1) * hd];
                for j in 0..hd {
                    tcb[j] = tanh(cc[j]);
                    hb[j] = o[j] * tcb[j];
                }
            }
        }
        Ok(LstmCache {
            input,
            gates,
            c,
            tc,
            h,
        })
    }

    /// Backpropagates `dh` (gradient w.r.t. every hidden state, same shape as
    /// `cache.hidden()`), accumulates into `grad`, returns the input gradient
    /// shaped like the layer input.
    pub fn backward(
        &self,
        cache: &LstmCache,
        dh: &Tensor2D,
        grad: &mut LstmLayer,
    ) -> Result<Tensor2D> {
        let hd = self.hidden_dim();
        let g4 = 4 * hd;
        let (bsz, m) = (cache.batch(), cache.steps());
        if dh.shape() != cache.h.shape() {
            return Err(shape_err(format!(
                "hidden gradient {:?} vs cached hidden {:?}",
                dh.shape(),
                cache.h.shape()
            )));
        }
        let rows = bsz * m;
        let mut dz = Tensor2D::zeros(rows, g4);
        let mut dh_next = Tensor2D::zeros(bsz, hd);
        let mut dc_next = Tensor2D::zeros(bsz, hd);
        for t in (0..m).rev() {
            for b in 0..bsz {
                let r = t * bsz + b;
                let z = cache.gates.row(r);
                let (i, rest) = z.split_at(hd);
                let (f, rest) = rest.split_at(hd);
                let (g, o) = rest.split_at(hd);
                let tcr = cache.tc.row(r);
                let dhr = dh.row(r);
                let dhn = dh_next.row(b);
                let dcn = dc_next.row_mut(b);
                let dzr = dz.row_mut(r);
                let cp = if t > 0 {
                    Some(cache.c.row(r - bsz))
                } else {
                    None
                };
                for j in 0..hd {
                    let tc = tcr[j];
                    let dhv = dhr[j] + dhn[j];
                    let dc = dhv * o[j] * (1.0 - tc * tc) + dcn[j];
                    dcn[j] = dc * f[j];
                    dzr[j] = dc * g[j] * i[j] * (1.0 - i[j]);
                    dzr[hd + j] = cp.map_or(0.0, |cp| dc * cp[j] * f[j] * (1.0 - f[j]));
                    dzr[2 * hd + j] = dc * i[j] * (1.0 - g[j] * g[j]);
                    dzr[3 * hd + j] = dhv * tc * o[j] * (1.0 - o[j]);
                }
            }
            if t > 0 {
                let dzt = MatRef::new(
                    &dz.as_slice()[t * bsz * g4..(t + 1) * bsz * g4],
                    bsz,
                    g4,
                    g4,
                    1,
                );
                gemm(1.0, dzt, self.u.view(), 0.0, dh_next.view_mut());
            }
        }

        // dU = Σ_{t≥1} dz_tᵀ · h_{t-1}
        if m > 1 {
            let later = MatRef::new(&dz.as_slice()[bsz * g4..], rows - bsz, g4, g4, 1);
            let earlier = MatRef::new(
                &cache.h.as_slice()[..(rows - bsz) * hd],
                rows - bsz,
                hd,
                hd,
                1,
            );
            gemm(1.0, later.t(), earlier, 1.0, grad.u.view_mut());
        }
        dz.col_sums_into(grad.b.as_mut_slice());

        match &cache.input {
            LstmInput::Sequence { x, .. } => {
                gemm(1.0, dz.view().t(), x.view(), 1.0, grad.w.view_mut());
                let mut dx = Tensor2D::zeros(rows, self.input_dim());
                gemm(1.0, dz.view(), self.w.view(), 0.0, dx.view_mut());
                Ok(dx)
            }
            LstmInput::Repeated { x, .. } => {
                let mut dzs = Tensor2D::zeros(bsz, g4);
                for block in dz.as_slice().chunks(bsz * g4) {
                    dzs.as_mut_slice()
                        .iter_mut()
                        .zip(block)
                        .for_each(|(a, v)| *a += v);
                }
                gemm(1.0, dzs.view().t(), x.view(), 1.0, grad.w.view_mut());
                let mut dx = Tensor2D::zeros(bsz, self.input_dim());
                gemm(1.0, dzs.view(), self.w.view(), 0.0, dx.view_mut());
                Ok(dx)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Params for LstmLayer {
    fn tensors(&self) -> Vec<&Tensor2D> {
        vec![&self.w, &self.u, &self.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
        vec![&mut self.w, &mut self.u, &mut self.b]
    }
}

/// Layers where layer `ℓ` consumes the full hidden sequence of layer `ℓ-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStack {
    pub layers: Vec<LstmLayer>,
}

impl LstmStack {
    pub fn new<R: Rng>(input: usize, hidden: &[usize], rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut d = input;
        for &h in hidden {
            layers.push(LstmLayer::new(d, h, rng));
            d = h;
        }
        LstmStack { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, LstmLayer::hidden_dim)
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(LstmLayer::hidden_dim).collect()
    }

    /// Runs every layer; the last cache holds the top hidden sequence.
    pub fn forward(&self, input: LstmInput) -> Result<Vec<LstmCache>> {
        if self.layers.is_empty() {
            return Err(shape_err("empty LSTM stack"));
        }
        let steps = input.steps();
        let mut caches: Vec<LstmCache> = Vec::with_capacity(self.layers.len());
        let mut next = input;
        for layer in &self.layers {
            let cache = layer.forward(next)?;
            next = LstmInput::Sequence {
                steps,
                x: cache.h.clone(),
            };
            caches.push(cache);
        }
        Ok(caches)
    }

    /// Many-to-one output: last-timestep hidden state of the top layer.
    pub fn forward_last(&self, input: LstmInput) -> Result<(Tensor2D, Vec<LstmCache>)> {
        let caches = self.forward(input)?;
        let last = caches.last().expect("non-empty stack").last_hidden();
        Ok((last, caches))
    }

    /// Backpropagates a gradient on the top hidden sequence through all layers.
    pub fn backward(
        &self,
        caches: &[LstmCache],
        dh_top: Tensor2D,
        grad: &mut LstmStack,
    ) -> Result<Tensor2D> {
        if caches.len() != self.layers.len() {
            return Err(shape_err(format!(
                "{} caches for {} layers",
                caches.len(),
                self.layers.len()
            )));
        }
        let mut dh = dh_top;
        for (li, layer) in self.layers.iter().enumerate().rev() {
            dh = layer.backward(&caches[li], &dh, &mut grad.layers[li])?;
        }
        Ok(dh)
    }

    /// Backpropagates a gradient on the last-timestep top hidden state only.
    pub fn backward_last(
        &self,
        caches: &[LstmCache],
        d_last: &Tensor2D,
        grad: &mut LstmStack,
    ) -> Result<Tensor2D> {
        let top = caches
            .last()
            .ok_or_else(|| shape_err("missing forward caches"))?;
        let (bsz, m) = (top.batch(), top.steps());
        if d_last.shape() != (bsz, top.h.cols()) {
            return Err(shape_err(format!(
                "last-state gradient has shape {:?}",
                d_last.shape()
            )));
        }
        let mut dh = top.h.zeros_like();
        let h = top.h.cols();
        dh.as_mut_slice()[(m - 1) * bsz * h..].copy_from_slice(d_last.as_slice());
        self.backward(caches, dh, grad)
    }
}

impl Params for LstmStack {
    fn tensors(&self) -> Vec<&Tensor2D> {
        self.layers.tensors()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor2D> {
        self.layers.tensors_mut()
    }
}

/// Many-to-one forward of a single `steps x d` sequence (row-major).
pub fn lstm_forward(stack: &LstmStack, seq: &Tensor2D) -> Result<Vec<f64>> {
    let (last, _) = stack.forward_last(LstmInput::Sequence {
        steps: seq.rows(),
        x: seq.clone(),
    })?;
    Ok(last.into_vec())
}
