//! Stochastic policy heads: a squashed Gaussian for continuous steering and
//! a categorical head for discrete actions, both with exact log
//! probabilities.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::SamoError;
use crate::nn::{Activation, DenseNet, Trace};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Floor inside the tanh-correction log; avoids -inf at saturation.
pub const SQUASH_EPS: f64 = 1e-6;

const LN_2PI: f64 = 1.8378770664093453;

/// One standard-normal draw via Box-Muller (cos branch). Deterministic for
/// a given RNG state and stable across platforms.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Environment action. Continuous actions are per-dimension in (-1, 1);
/// discrete actions are an index.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Continuous(Vec<f64>),
    Discrete(usize),
}

impl Action {
    pub fn continuous(&self) -> &[f64] {
        match self {
            Action::Continuous(v) => v,
            Action::Discrete(_) => panic!("expected continuous action"),
        }
    }

    pub fn discrete(&self) -> usize {
        match self {
            Action::Discrete(i) => *i,
            Action::Continuous(_) => panic!("expected discrete action"),
        }
    }
}

/// Action-space descriptor shared by environments, learners and
/// termination functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionSpace {
    /// Per-dimension continuous actions in `[-1, 1]`.
    Continuous { dim: usize },
    /// `n` discrete actions.
    Discrete { n: usize },
}

impl ActionSpace {
    /// Width of the action when encoded as a real vector (one-hot for
    /// discrete actions); used for Q and termination inputs.
    pub fn encoded_dim(&self) -> usize {
        match self {
            ActionSpace::Continuous { dim } => *dim,
            ActionSpace::Discrete { n } => *n,
        }
    }

    /// Entropy target `-dim(A)` used for temperature tuning.
    pub fn target_entropy(&self) -> f64 {
        -(self.encoded_dim() as f64)
    }

    /// Encodes an action into `buf` (must be `encoded_dim` long).
    pub fn encode(&self, action: &Action, buf: &mut [f64]) {
        match (self, action) {
            (ActionSpace::Continuous { dim }, Action::Continuous(v)) => {
                assert_eq!(v.len(), *dim);
                buf.copy_from_slice(v);
            }
            (ActionSpace::Discrete { n }, Action::Discrete(i)) => {
                assert!(*i < *n);
                buf.fill(0.0);
                buf[*i] = 1.0;
            }
            _ => panic!("action kind does not match action space"),
        }
    }

    /// A uniformly random action, for warmup exploration.
    pub fn uniform_random(&self, rng: &mut ChaCha8Rng) -> Action {
        match self {
            ActionSpace::Continuous { dim } => {
                Action::Continuous((0..*dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            }
            ActionSpace::Discrete { n } => Action::Discrete(rng.gen_range(0..*n)),
        }
    }
}

/// Gaussian head: the backing net emits `(mu, log_sigma)` per action
/// dimension; actions are `tanh` of the pre-squash draw.
#[derive(Debug, Clone)]
pub struct GaussianHead {
    net: DenseNet,
    action_dim: usize,
}

impl GaussianHead {
    pub fn new(obs_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(2 * action_dim);
        GaussianHead {
            net: DenseNet::new(&sizes, Activation::Tanh, rng),
            action_dim,
        }
    }

    pub fn from_net(net: DenseNet) -> Self {
        let action_dim = net.output_dim() / 2;
        GaussianHead { net, action_dim }
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut DenseNet {
        &mut self.net
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    /// Splits net output into (mu, clamped log_sigma).
    fn stats(&self, out: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mu = out[..self.action_dim].to_vec();
        let log_std = out[self.action_dim..]
            .iter()
            .map(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        (mu, log_std)
    }

    /// Samples with injected standard-normal noise; returns the squashed
    /// action and its log probability.
    pub fn sample_with_noise(&self, state: &[f64], noise: &[f64]) -> Result<(Vec<f64>, f64), SamoError> {
        assert_eq!(noise.len(), self.action_dim);
        let out = self.net.forward(state)?;
        let (mu, log_std) = self.stats(&out);
        let mut action = Vec::with_capacity(self.action_dim);
        let mut log_prob = 0.0;
        for d in 0..self.action_dim {
            let sigma = log_std[d].exp();
            let u = mu[d] + sigma * noise[d];
            let a = u.tanh();
            log_prob += -0.5 * noise[d] * noise[d] - log_std[d] - 0.5 * LN_2PI;
            log_prob -= (1.0 - a * a + SQUASH_EPS).ln();
            action.push(a);
        }
        Ok((action, log_prob))
    }

    pub fn sample(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, f64), SamoError> {
        let noise: Vec<f64> = (0..self.action_dim).map(|_| standard_normal(rng)).collect();
        self.sample_with_noise(state, &noise)
    }

    /// Inverse-tanh recovery of the pre-squash value; same density formula
    /// as sampling. Requires |action| < 1 per dimension.
    pub fn log_prob(&self, state: &[f64], action: &[f64]) -> Result<f64, SamoError> {
        assert_eq!(action.len(), self.action_dim);
        let out = self.net.forward(state)?;
        let (mu, log_std) = self.stats(&out);
        let mut log_prob = 0.0;
        for d in 0..self.action_dim {
            let a = action[d];
            if a.abs() >= 1.0 {
                return Err(SamoError::Domain(format!(
                    "action component {a} outside (-1, 1)"
                )));
            }
            let u = a.atanh();
            let sigma = log_std[d].exp();
            let z = (u - mu[d]) / sigma;
            log_prob += -0.5 * z * z - log_std[d] - 0.5 * LN_2PI;
            log_prob -= (1.0 - a * a + SQUASH_EPS).ln();
        }
        Ok(log_prob)
    }

    /// Evaluation action: tanh of the mean.
    pub fn greedy(&self, state: &[f64]) -> Result<Vec<f64>, SamoError> {
        let out = self.net.forward(state)?;
        Ok(out[..self.action_dim].iter().map(|m| m.tanh()).collect())
    }

    /// Monte-Carlo entropy estimate `-E[log pi]`.
    pub fn entropy_estimate(&self, state: &[f64], n_samples: usize, rng: &mut ChaCha8Rng) -> Result<f64, SamoError> {
        assert!(n_samples >= 1);
        let mut acc = 0.0;
        for _ in 0..n_samples {
            let (_, lp) = self.sample(state, rng)?;
            acc -= lp;
        }
        Ok(acc / n_samples as f64)
    }
}

/// Categorical head: one logit per discrete action.
#[derive(Debug, Clone)]
pub struct CategoricalHead {
    net: DenseNet,
    n_actions: usize,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

impl CategoricalHead {
    pub fn new(obs_dim: usize, n_actions: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(n_actions);
        CategoricalHead {
            net: DenseNet::new(&sizes, Activation::Tanh, rng),
            n_actions,
        }
    }

    pub fn from_net(net: DenseNet) -> Self {
        let n_actions = net.output_dim();
        CategoricalHead { net, n_actions }
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut DenseNet {
        &mut self.net
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn probs(&self, state: &[f64]) -> Result<Vec<f64>, SamoError> {
        Ok(softmax(&self.net.forward(state)?))
    }

    /// Inverse-CDF sampling over the softmax probabilities.
    pub fn sample_with_draw(&self, state: &[f64], uniform_draw: f64) -> Result<(usize, f64), SamoError> {
        assert!((0.0..1.0).contains(&uniform_draw));
        let probs = self.probs(state)?;
        let mut cdf = 0.0;
        for (i, p) in probs.iter().enumerate() {
            cdf += p;
            if uniform_draw < cdf {
                return Ok((i, p.ln()));
            }
        }
        // Rounding left the draw past the accumulated mass.
        let last = self.n_actions - 1;
        Ok((last, probs[last].ln()))
    }

    pub fn sample(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Result<(usize, f64), SamoError> {
        let draw: f64 = rng.gen();
        self.sample_with_draw(state, draw)
    }

    pub fn log_prob(&self, state: &[f64], action: usize) -> Result<f64, SamoError> {
        Ok(self.probs(state)?[action].ln())
    }

    pub fn greedy(&self, state: &[f64]) -> Result<usize, SamoError> {
        let probs = self.probs(state)?;
        let mut best = 0;
        for i in 1..probs.len() {
            if probs[i] > probs[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Exact entropy of the softmax distribution.
    pub fn entropy(&self, state: &[f64]) -> Result<f64, SamoError> {
        let probs = self.probs(state)?;
        Ok(-probs.iter().map(|p| p * p.ln()).sum::<f64>())
    }
}

/// Either policy head; options hold one of these.
#[derive(Debug, Clone)]
pub enum PolicyHead {
    Gaussian(GaussianHead),
    Categorical(CategoricalHead),
}

impl PolicyHead {
    /// Samples (or greedily selects) an action.
    pub fn act(&self, state: &[f64], greedy: bool, rng: &mut ChaCha8Rng) -> Result<Action, SamoError> {
        match self {
            PolicyHead::Gaussian(h) => {
                if greedy {
                    Ok(Action::Continuous(h.greedy(state)?))
                } else {
                    Ok(Action::Continuous(h.sample(state, rng)?.0))
                }
            }
            PolicyHead::Categorical(h) => {
                if greedy {
                    Ok(Action::Discrete(h.greedy(state)?))
                } else {
                    Ok(Action::Discrete(h.sample(state, rng)?.0))
                }
            }
        }
    }

    /// Monte-Carlo entropy for Gaussian heads; exact entropy for
    /// categorical heads (n_samples ignored there).
    pub fn entropy_estimate(&self, state: &[f64], n_samples: usize, rng: &mut ChaCha8Rng) -> Result<f64, SamoError> {
        match self {
            PolicyHead::Gaussian(h) => h.entropy_estimate(state, n_samples, rng),
            PolicyHead::Categorical(h) => h.entropy(state),
        }
    }

    pub fn net(&self) -> &DenseNet {
        match self {
            PolicyHead::Gaussian(h) => h.net(),
            PolicyHead::Categorical(h) => h.net(),
        }
    }

    pub fn net_mut(&mut self) -> &mut DenseNet {
        match self {
            PolicyHead::Gaussian(h) => h.net_mut(),
            PolicyHead::Categorical(h) => h.net_mut(),
        }
    }
}

/// Reparameterized gradient pieces for one continuous sample, used by the
/// policy update and its finite-difference check.
pub(crate) struct ReparamSample {
    pub trace: Trace,
    pub action: Vec<f64>,
    pub log_prob: f64,
    /// d log_prob / d mu_d (holding noise fixed).
    pub dlp_dmu: Vec<f64>,
    /// d log_prob / d log_sigma_d (zero where the clamp is active).
    pub dlp_dlogstd: Vec<f64>,
    /// d action_d / d mu_d.
    pub da_dmu: Vec<f64>,
    /// d action_d / d log_sigma_d (zero where the clamp is active).
    pub da_dlogstd: Vec<f64>,
}

impl GaussianHead {
    /// Forward pass plus all per-dimension partials of the reparameterized
    /// sample `a = tanh(mu + sigma * noise)`.
    pub(crate) fn reparam_sample(&self, state: &[f64], noise: &[f64]) -> Result<ReparamSample, SamoError> {
        let trace = self.net.forward_trace(state)?;
        let out = trace.output().to_vec();
        let d = self.action_dim;
        let mut action = vec![0.0; d];
        let mut log_prob = 0.0;
        let mut dlp_dmu = vec![0.0; d];
        let mut dlp_dlogstd = vec![0.0; d];
        let mut da_dmu = vec![0.0; d];
        let mut da_dlogstd = vec![0.0; d];
        for i in 0..d {
            let raw_ls = out[d + i];
            let clamped = !(LOG_STD_MIN..=LOG_STD_MAX).contains(&raw_ls);
            let ls = raw_ls.clamp(LOG_STD_MIN, LOG_STD_MAX);
            let sigma = ls.exp();
            let u = out[i] + sigma * noise[i];
            let a = u.tanh();
            let denom = 1.0 - a * a + SQUASH_EPS;
            log_prob += -0.5 * noise[i] * noise[i] - ls - 0.5 * LN_2PI - denom.ln();
            // d/du of -ln(1 - tanh(u)^2 + eps)
            let dcorr_du = 2.0 * a * (1.0 - a * a) / denom;
            let da_du = 1.0 - a * a;
            action[i] = a;
            dlp_dmu[i] = dcorr_du;
            da_dmu[i] = da_du;
            if clamped {
                dlp_dlogstd[i] = 0.0;
                da_dlogstd[i] = 0.0;
            } else {
                dlp_dlogstd[i] = -1.0 + dcorr_du * sigma * noise[i];
                da_dlogstd[i] = da_du * sigma * noise[i];
            }
        }
        Ok(ReparamSample {
            trace,
            action,
            log_prob,
            dlp_dmu,
            dlp_dlogstd,
            da_dmu,
            da_dlogstd,
        })
    }
}
