//! Nested termination functions: scalar classifiers over (state, action)
//! predicting proximity to failure for an option prefix. Trained online
//! with a TD bootstrap and retrained after each freeze with balanced
//! binary cross entropy on geometric labels.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::SamoError;
use crate::nn::{Activation, Adam, DenseNet};
use crate::policy::{Action, ActionSpace};
use crate::replay::Transition;

/// Default hard-classification threshold. At `gamma_beta = 0.95` this
/// marks states within about 13.5 steps of failure as termination states.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Termination function for the prefix of the first `prefix_len` options.
/// The backing net maps `state ++ encoded action` to one pre-sigmoid
/// output.
#[derive(Debug, Clone)]
pub struct TerminationFn {
    net: DenseNet,
    opt: Adam,
    space: ActionSpace,
    obs_dim: usize,
    pub prefix_len: usize,
    pub threshold: f64,
}

impl TerminationFn {
    pub fn new(obs_dim: usize, space: ActionSpace, prefix_len: usize, rng: &mut ChaCha8Rng) -> Self {
        assert!(prefix_len >= 1);
        let sizes = [obs_dim + space.encoded_dim(), 64, 64, 1];
        let net = DenseNet::new(&sizes, Activation::Tanh, rng);
        let opt = Adam::new(net.param_count());
        TerminationFn {
            net,
            opt,
            space,
            obs_dim,
            prefix_len,
            threshold: DEFAULT_THRESHOLD,
        }
    }

    /// Warm start for the next prefix: parameters copied bit-exactly from
    /// the previous prefix function, fresh optimizer state.
    pub fn warm_start(prev: &TerminationFn) -> Self {
        TerminationFn {
            net: prev.net.clone(),
            opt: Adam::new(prev.net.param_count()),
            space: prev.space,
            obs_dim: prev.obs_dim,
            prefix_len: prev.prefix_len + 1,
            threshold: prev.threshold,
        }
    }

    pub fn from_net(net: DenseNet, space: ActionSpace, obs_dim: usize, prefix_len: usize, threshold: f64) -> Self {
        let opt = Adam::new(net.param_count());
        TerminationFn {
            net,
            opt,
            space,
            obs_dim,
            prefix_len,
            threshold,
        }
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut DenseNet {
        &mut self.net
    }

    fn input(&self, state: &[f64], action: &Action) -> Vec<f64> {
        let mut buf = vec![0.0; self.obs_dim + self.space.encoded_dim()];
        buf[..self.obs_dim].copy_from_slice(state);
        self.space.encode(action, &mut buf[self.obs_dim..]);
        buf
    }

    /// Soft output in (0, 1).
    pub fn prob(&self, state: &[f64], action: &Action) -> Result<f64, SamoError> {
        let x = self.input(state, action);
        Ok(sigmoid(self.net.forward(&x)?[0]))
    }

    /// Hard classification: 1 (termination) iff the output reaches the
    /// threshold; ties classify as termination.
    pub fn classify(&self, state: &[f64], action: &Action) -> Result<bool, SamoError> {
        Ok(self.prob(state, action)? >= self.threshold)
    }

    /// TD bootstrap toward `r_beta + gamma_beta * beta(s', a')`, clamped to
    /// [0, 1]; terminal transitions regress to `r_beta` directly. Returns
    /// the mean squared loss.
    pub fn td_update(&mut self, batch: &[&Transition], gamma_beta: f64, lr: f64) -> Result<f64, SamoError> {
        assert!(!batch.is_empty());
        let b = batch.len() as f64;
        let mut grads = vec![0.0; self.net.param_count()];
        let mut loss = 0.0;
        for t in batch {
            let target = if t.done {
                t.beta_reward
            } else {
                let next = self.prob(&t.next_state, &t.next_action)?;
                (t.beta_reward + gamma_beta * next).clamp(0.0, 1.0)
            };
            let x = self.input(&t.state, &t.action);
            let trace = self.net.forward_trace(&x)?;
            let p = sigmoid(trace.output()[0]);
            let residual = p - target;
            loss += residual * residual;
            // d/dz of (sigmoid(z) - y)^2
            let up = 2.0 * residual * p * (1.0 - p);
            self.net.backward_acc(&trace, &[up], 1.0 / b, &mut grads)?;
        }
        self.opt.step(self.net.params_mut(), &grads, lr)?;
        Ok(loss / b)
    }

    /// Balanced binary cross entropy over a labeled pool: every minibatch
    /// draws half from the `y >= 0.5` side and half from the `y < 0.5`
    /// side, with replacement. Returns the final epoch's mean loss, or
    /// `None` (training skipped, warning logged) when either side is empty.
    pub fn bce_train(
        &mut self,
        pool: &LabeledPool,
        epochs: usize,
        minibatch: usize,
        lr: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<f64>, SamoError> {
        let (pos, neg): (Vec<usize>, Vec<usize>) = {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (i, item) in pool.items.iter().enumerate() {
                if item.2 >= 0.5 {
                    pos.push(i);
                } else {
                    neg.push(i);
                }
            }
            (pos, neg)
        };
        if pos.is_empty() || neg.is_empty() {
            log::warn!(
                "bce training skipped for prefix {}: {} probable-termination and {} non-termination samples",
                self.prefix_len,
                pos.len(),
                neg.len()
            );
            return Ok(None);
        }
        let half = (minibatch / 2).max(1);
        let batches_per_epoch = (pool.items.len() / (2 * half)).max(1);
        let mut last_loss = 0.0;
        for _ in 0..epochs {
            let mut epoch_loss = 0.0;
            for _ in 0..batches_per_epoch {
                let mut grads = vec![0.0; self.net.param_count()];
                let mut loss = 0.0;
                for k in 0..2 * half {
                    let idx = if k < half {
                        pos[rng.gen_range(0..pos.len())]
                    } else {
                        neg[rng.gen_range(0..neg.len())]
                    };
                    let (state, action, y) = &pool.items[idx];
                    let x = self.input(state, action);
                    let trace = self.net.forward_trace(&x)?;
                    let p = sigmoid(trace.output()[0]).clamp(1e-12, 1.0 - 1e-12);
                    loss += -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
                    // d/dz of the BCE through the sigmoid.
                    let up = p - y;
                    self.net
                        .backward_acc(&trace, &[up], 1.0 / (2.0 * half as f64), &mut grads)?;
                }
                self.opt.step(self.net.params_mut(), &grads, lr)?;
                epoch_loss += loss / (2.0 * half as f64);
            }
            last_loss = epoch_loss / batches_per_epoch as f64;
        }
        Ok(Some(last_loss))
    }
}

/// BCE targets along a rolled-out trajectory of length `t_len`: geometric
/// discounting back from the failure, or all zeros when the episode ended
/// by the step cap instead of failing.
pub fn geometric_labels(t_len: usize, gamma_beta: f64, failed: bool) -> Vec<f64> {
    assert!(t_len >= 1);
    if !failed {
        return vec![0.0; t_len];
    }
    (0..t_len)
        .map(|t| gamma_beta.powi((t_len - 1 - t) as i32))
        .collect()
}

/// Rollout pool of `(state, action, label)` records with FIFO eviction.
#[derive(Debug, Default)]
pub struct LabeledPool {
    items: Vec<(Vec<f64>, Action, f64)>,
    capacity: usize,
    head: usize,
}

impl LabeledPool {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        LabeledPool {
            items: Vec::new(),
            capacity,
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() >= self.capacity
    }

    /// True when both label classes are represented (threshold 0.5), i.e.
    /// balanced BCE sampling is possible.
    pub fn has_both_sides(&self) -> bool {
        self.items.iter().any(|(_, _, y)| *y >= 0.5) && self.items.iter().any(|(_, _, y)| *y < 0.5)
    }

    pub fn push(&mut self, state: Vec<f64>, action: Action, label: f64) {
        if self.items.len() < self.capacity {
            self.items.push((state, action, label));
        } else {
            self.items[self.head] = (state, action, label);
            self.head = (self.head + 1) % self.capacity;
        }
    }

    pub fn items(&self) -> &[(Vec<f64>, Action, f64)] {
        &self.items
    }
}
