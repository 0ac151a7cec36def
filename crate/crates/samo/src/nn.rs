//! Dense-network numerical core: parameter storage, forward/backward passes
//! and Adam updates for every policy, Q and termination network.
//!
//! Everything is 64-bit and scalar. Parameters live in one flat buffer laid
//! out `[W1 (row-major, out x in), b1, W2, b2, ...]`, which keeps the Adam
//! update and checkpoint serialization trivial. Forward and backward never
//! mutate the net; updates go through [`Adam::step`] with exclusive access.

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::SamoError;

/// Hidden-layer activation. The output layer is always identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative expressed through the post-activation value.
    #[inline]
    fn derive_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Dot product with four independent accumulators. The fixed association
/// order keeps results bit-identical run to run.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut rest = 0.0;
    for j in chunks * 4..a.len() {
        rest += a[j] * b[j];
    }
    ((s0 + s1) + (s2 + s3)) + rest
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Fully connected network with identity output.
#[derive(Debug, Clone)]
pub struct DenseNet {
    sizes: Vec<usize>,
    hidden: Activation,
    params: Vec<f64>,
}

/// Per-layer post-activations cached by [`DenseNet::forward_trace`];
/// `activations[0]` is the input itself.
#[derive(Debug, Clone)]
pub struct Trace {
    activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace has layers")
    }
}

impl DenseNet {
    /// Builds a net with weights and biases drawn uniformly from
    /// `+-1/sqrt(n_in)` per layer.
    pub fn new(sizes: &[usize], hidden: Activation, rng: &mut ChaCha8Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        assert!(sizes.iter().all(|&s| s > 0), "layer sizes must be positive");
        let count = param_count_for(sizes);
        let mut params = Vec::with_capacity(count);
        for l in 0..sizes.len() - 1 {
            let bound = 1.0 / (sizes[l] as f64).sqrt();
            let n = (sizes[l] + 1) * sizes[l + 1];
            for _ in 0..n {
                params.push(rng.gen_range(-bound..bound));
            }
        }
        DenseNet {
            sizes: sizes.to_vec(),
            hidden,
            params,
        }
    }

    /// A net with all parameters zero; handy for mocks and tests.
    pub fn zeros(sizes: &[usize], hidden: Activation) -> Self {
        let count = param_count_for(sizes);
        DenseNet {
            sizes: sizes.to_vec(),
            hidden,
            params: vec![0.0; count],
        }
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offsets of the weight matrix and bias vector of layer `l`.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for k in 0..l {
            off += (self.sizes[k] + 1) * self.sizes[k + 1];
        }
        (off, off + self.sizes[l] * self.sizes[l + 1])
    }

    fn check_input(&self, input: &[f64]) -> Result<(), SamoError> {
        if input.len() != self.sizes[0] {
            return Err(SamoError::Config(format!(
                "input length {} does not match first layer size {}",
                input.len(),
                self.sizes[0]
            )));
        }
        Ok(())
    }

    /// Deterministic forward pass; pure in `(self, input)`.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, SamoError> {
        self.check_input(input)?;
        let last = self.sizes.len() - 2;
        let mut cur = input.to_vec();
        for l in 0..self.sizes.len() - 1 {
            cur = self.affine(l, &cur);
            if l < last {
                for v in cur.iter_mut() {
                    *v = self.hidden.apply(*v);
                }
            }
        }
        Ok(cur)
    }

    /// Forward pass that caches every post-activation for a later backward.
    pub fn forward_trace(&self, input: &[f64]) -> Result<Trace, SamoError> {
        self.check_input(input)?;
        let last = self.sizes.len() - 2;
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(input.to_vec());
        for l in 0..self.sizes.len() - 1 {
            let mut cur = self.affine(l, activations.last().unwrap());
            if l < last {
                for v in cur.iter_mut() {
                    *v = self.hidden.apply(*v);
                }
            }
            activations.push(cur);
        }
        Ok(Trace { activations })
    }

    fn affine(&self, l: usize, input: &[f64]) -> Vec<f64> {
        let (w_off, b_off) = self.layer_offsets(l);
        let n_in = self.sizes[l];
        let n_out = self.sizes[l + 1];
        let w = &self.params[w_off..w_off + n_in * n_out];
        let b = &self.params[b_off..b_off + n_out];
        let mut out = Vec::with_capacity(n_out);
        for (o, row) in w.chunks_exact(n_in).enumerate() {
            out.push(b[o] + dot(row, input));
        }
        out
    }

    /// Chain-rule backward pass. Returns `(parameter gradients, input
    /// gradient)`; gradient layout matches [`DenseNet::params`].
    pub fn backward(&self, trace: &Trace, upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SamoError> {
        let mut grads = vec![0.0; self.params.len()];
        let input_grad = self.backward_acc(trace, upstream, 1.0, &mut grads)?;
        Ok((grads, input_grad))
    }

    /// Backward pass accumulating `scale * grad` into `grads`; used to sum
    /// over a minibatch without reallocation. Also returns the (scaled)
    /// input gradient.
    pub fn backward_acc(
        &self,
        trace: &Trace,
        upstream: &[f64],
        scale: f64,
        grads: &mut [f64],
    ) -> Result<Vec<f64>, SamoError> {
        let n_layers = self.sizes.len() - 1;
        if upstream.len() != self.sizes[n_layers] {
            return Err(SamoError::Config(format!(
                "upstream gradient length {} does not match output size {}",
                upstream.len(),
                self.sizes[n_layers]
            )));
        }
        debug_assert_eq!(grads.len(), self.params.len());

        let mut gz: Vec<f64> = upstream.iter().map(|g| g * scale).collect();
        for l in (0..n_layers).rev() {
            let (w_off, _) = self.layer_offsets(l);
            let n_in = self.sizes[l];
            let n_out = self.sizes[l + 1];
            let prev = &trace.activations[l];
            let w = &self.params[w_off..w_off + n_in * n_out];
            let mut ga = vec![0.0; n_in];
            {
                let (gw, rest) = grads[w_off..].split_at_mut(n_in * n_out);
                let gb = &mut rest[..n_out];
                for o in 0..n_out {
                    let g = gz[o];
                    gb[o] += g;
                    let row = &w[o * n_in..(o + 1) * n_in];
                    let grow = &mut gw[o * n_in..(o + 1) * n_in];
                    axpy(g, prev, grow);
                    axpy(g, row, &mut ga);
                }
            }
            if l > 0 {
                for (g, y) in ga.iter_mut().zip(prev) {
                    *g *= self.hidden.derive_from_output(*y);
                }
            }
            gz = ga;
        }
        Ok(gz)
    }

    /// Gradient of the output w.r.t. the input only; skips the weight
    /// gradients (used when differentiating Q through its action input).
    pub fn input_gradient(&self, trace: &Trace, upstream: &[f64]) -> Result<Vec<f64>, SamoError> {
        let n_layers = self.sizes.len() - 1;
        if upstream.len() != self.sizes[n_layers] {
            return Err(SamoError::Config(format!(
                "upstream gradient length {} does not match output size {}",
                upstream.len(),
                self.sizes[n_layers]
            )));
        }
        let mut gz: Vec<f64> = upstream.to_vec();
        for l in (0..n_layers).rev() {
            let (w_off, _) = self.layer_offsets(l);
            let n_in = self.sizes[l];
            let n_out = self.sizes[l + 1];
            let prev = &trace.activations[l];
            let w = &self.params[w_off..w_off + n_in * n_out];
            let mut ga = vec![0.0; n_in];
            for o in 0..n_out {
                axpy(gz[o], &w[o * n_in..(o + 1) * n_in], &mut ga);
            }
            if l > 0 {
                for (g, y) in ga.iter_mut().zip(prev) {
                    *g *= self.hidden.derive_from_output(*y);
                }
            }
            gz = ga;
        }
        Ok(gz)
    }

    /// Writes the checkpoint fragment: layer-size count and sizes as u32
    /// little-endian, then parameters as f64 little-endian, row-major.
    pub fn write_fragment<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&(self.sizes.len() as u32).to_le_bytes())?;
        for s in &self.sizes {
            w.write_all(&(*s as u32).to_le_bytes())?;
        }
        for p in &self.params {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a fragment written by [`DenseNet::write_fragment`].
    pub fn read_fragment<R: Read>(r: &mut R, hidden: Activation) -> Result<Self, SamoError> {
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        if n < 2 || n > 64 {
            return Err(SamoError::Format(format!("implausible layer count {n}")));
        }
        let mut sizes = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b4)?;
            let s = u32::from_le_bytes(b4) as usize;
            if s == 0 {
                return Err(SamoError::Format("zero layer size".into()));
            }
            sizes.push(s);
        }
        let count = param_count_for(&sizes);
        let mut params = Vec::with_capacity(count);
        let mut b8 = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            params.push(f64::from_le_bytes(b8));
        }
        Ok(DenseNet {
            sizes,
            hidden,
            params,
        })
    }
}

/// Total parameter count for a layer-size list: sum over (n_in+1)*n_out.
pub fn param_count_for(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

/// Adam state; moment arrays have the same flat layout as the parameters.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(param_count: usize) -> Self {
        Adam {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Bias-corrected Adam update. Rejects non-finite gradients without
    /// touching parameters or moments.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<(), SamoError> {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        assert!(lr > 0.0, "learning rate must be positive");
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(SamoError::Numeric("non-finite gradient in Adam update".into()));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= lr * mhat / (vhat.sqrt() + self.eps);
        }
        Ok(())
    }
}
