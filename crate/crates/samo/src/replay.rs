//! Bounded replay buffer of transition records.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::policy::Action;

/// One stored environment transition. `beta_reward` is 1 exactly when the
/// episode ended in failure at `next_state`; `next_action` is the action
/// actually taken at the next state under the composite behavior (zeros /
/// index 0 on terminal transitions, where it is never read).
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Action,
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub beta_reward: f64,
    pub done: bool,
    pub next_action: Action,
}

/// FIFO ring with uniform sampling.
#[derive(Debug)]
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer {
            data: Vec::with_capacity(capacity.min(1 << 20)),
            capacity,
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.data[i]
    }

    /// Uniform sample of `n` items (with replacement).
    pub fn sample<'a>(&'a self, n: usize, rng: &mut ChaCha8Rng) -> Vec<&'a Transition> {
        assert!(!self.data.is_empty(), "cannot sample an empty buffer");
        (0..n)
            .map(|_| &self.data[rng.gen_range(0..self.data.len())])
            .collect()
    }
}
