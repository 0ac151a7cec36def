//! Shared oracles and helpers for the integration and acceptance tests.

use samo::nn::DenseNet;

/// Central finite differences of `sum(upstream * net(input))` w.r.t. every
/// parameter; independent of the backward implementation.
pub fn fd_param_grads(net: &DenseNet, input: &[f64], upstream: &[f64], h: f64) -> Vec<f64> {
    let mut probe = net.clone();
    let mut out = vec![0.0; net.param_count()];
    let loss = |n: &DenseNet| -> f64 {
        n.forward(input)
            .unwrap()
            .iter()
            .zip(upstream)
            .map(|(o, u)| o * u)
            .sum()
    };
    for i in 0..net.param_count() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let fp = loss(&probe);
        probe.params_mut()[i] = orig - h;
        let fm = loss(&probe);
        probe.params_mut()[i] = orig;
        out[i] = (fp - fm) / (2.0 * h);
    }
    out
}

/// Two-state, two-action deterministic MDP with known dynamics; a
/// continuing task used to check SAC's value estimates against value
/// iteration. `(reward, next_state)` indexed by `[state][action]`.
pub const TWO_STATE_TABLE: [[(f64, usize); 2]; 2] = [
    [(1.0, 0), (0.0, 1)],  // state 0: stay profitably, or drift to 1
    [(-0.2, 0), (0.5, 1)], // state 1: costly reset, or stay for less
];

/// Exact Q values by value iteration.
pub fn two_state_value_iteration(gamma: f64, sweeps: usize) -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..sweeps {
        let mut next = q;
        for s in 0..2 {
            for a in 0..2 {
                let (r, s2) = TWO_STATE_TABLE[s][a];
                next[s][a] = r + gamma * q[s2][0].max(q[s2][1]);
            }
        }
        q = next;
    }
    q
}

pub fn one_hot2(state: usize) -> Vec<f64> {
    let mut obs = vec![0.0; 2];
    obs[state] = 1.0;
    obs
}
