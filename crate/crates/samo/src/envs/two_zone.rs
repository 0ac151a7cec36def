//! Tiny discrete loop MDP with an exactly known optimal policy: ten
//! positions on a ring, the first five survivable only under action 0 and
//! the rest only under action 1. A wrong action ends the episode with
//! reward -1; surviving advances one position. Every start admits
//! cap-length survival, which makes the optimal value brute-forceable.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Environment, Step, StepInfo};
use crate::error::SamoError;
use crate::policy::{Action, ActionSpace};

pub const N_POSITIONS: usize = 10;

pub struct TwoZoneEnv {
    max_steps: u32,
    position: usize,
    steps: u32,
    done: bool,
}

impl TwoZoneEnv {
    pub fn new(max_steps: u32) -> Self {
        TwoZoneEnv {
            max_steps,
            position: 0,
            steps: 0,
            done: true,
        }
    }

    pub fn position(&self) -> usize {
        self.position
    }

    /// The only surviving action at a position.
    pub fn correct_action(position: usize) -> usize {
        if position < N_POSITIONS / 2 {
            0
        } else {
            1
        }
    }

    fn observe(&self) -> Vec<f64> {
        let mut obs = vec![0.0; N_POSITIONS];
        obs[self.position] = 1.0;
        obs
    }
}

impl Environment for TwoZoneEnv {
    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete { n: 2 }
    }

    fn obs_dim(&self) -> usize {
        N_POSITIONS
    }

    fn max_steps(&self) -> u32 {
        self.max_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.position = rng.gen_range(0..N_POSITIONS);
        self.steps = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: &Action) -> Result<Step, SamoError> {
        if self.done {
            return Err(SamoError::Usage("step after episode end".into()));
        }
        let a = action.discrete();
        if a != Self::correct_action(self.position) {
            self.done = true;
            return Ok(Step {
                obs: self.observe(),
                reward: -1.0,
                done: true,
                info: StepInfo::Failure,
            });
        }
        self.position = (self.position + 1) % N_POSITIONS;
        self.steps += 1;
        let capped = self.steps >= self.max_steps;
        self.done = capped;
        Ok(Step {
            obs: self.observe(),
            reward: 0.0,
            done: capped,
            info: if capped { StepInfo::Cap } else { StepInfo::None },
        })
    }

    fn agent_pose(&self) -> Option<(f64, f64, f64)> {
        Some((self.position as f64, 0.0, 0.0))
    }
}
