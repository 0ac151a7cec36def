//! Desk-scale environments: stay-alive corridor navigation (plain and
//! color-cued), instruction-conditioned goal corridors, and a tiny
//! analytically solvable loop MDP for oracle tests.

pub mod corridor;
pub mod geometry;
pub mod goal;
pub mod map;
pub mod two_zone;

pub use corridor::CorridorEnv;
pub use goal::GoalCorridorEnv;
pub use two_zone::TwoZoneEnv;

use crate::error::SamoError;
use crate::policy::{Action, ActionSpace};

/// Episode-end cause reported alongside each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepInfo {
    None,
    /// Collision or other fatal mistake.
    Failure,
    /// Reached the instructed goal region.
    Goal,
    /// Step cap reached without failing.
    Cap,
    /// Entered a corridor other than the instructed one.
    WrongCorridor,
}

impl StepInfo {
    /// True for episode ends that count as failures for the termination
    /// reward (collision and wrong corridor; goals and caps do not).
    pub fn is_failure(self) -> bool {
        matches!(self, StepInfo::Failure | StepInfo::WrongCorridor)
    }
}

#[derive(Debug, Clone)]
pub struct Step {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Environment contract. After a step with `done = true`, further steps
/// are a usage error until `reset`.
pub trait Environment {
    fn action_space(&self) -> ActionSpace;
    fn obs_dim(&self) -> usize;
    fn max_steps(&self) -> u32;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: &Action) -> Result<Step, SamoError>;

    /// `(x, y, heading)` for trajectory traces, when the environment has a
    /// spatial pose.
    fn agent_pose(&self) -> Option<(f64, f64, f64)> {
        None
    }
}

/// Stacks the last `k` per-step frames into one observation, zero-padded
/// at episode start (newest frame last).
pub struct FrameStack<E> {
    inner: E,
    k: usize,
    frames: Vec<Vec<f64>>,
}

impl<E: Environment> FrameStack<E> {
    pub fn new(inner: E, k: usize) -> Self {
        assert!(k >= 1);
        FrameStack {
            inner,
            k,
            frames: Vec::new(),
        }
    }

    fn stacked(&self) -> Vec<f64> {
        let frame_dim = self.inner.obs_dim();
        let mut out = vec![0.0; frame_dim * self.k];
        let have = self.frames.len().min(self.k);
        for (slot, frame) in self.frames[self.frames.len() - have..].iter().enumerate() {
            let at = (self.k - have + slot) * frame_dim;
            out[at..at + frame_dim].copy_from_slice(frame);
        }
        out
    }

    fn push_frame(&mut self, frame: Vec<f64>) {
        if self.frames.len() == self.k {
            self.frames.remove(0);
        }
        self.frames.push(frame);
    }
}

impl<E: Environment> Environment for FrameStack<E> {
    fn action_space(&self) -> ActionSpace {
        self.inner.action_space()
    }

    fn obs_dim(&self) -> usize {
        self.inner.obs_dim() * self.k
    }

    fn max_steps(&self) -> u32 {
        self.inner.max_steps()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let frame = self.inner.reset(seed);
        self.frames.clear();
        self.push_frame(frame);
        self.stacked()
    }

    fn step(&mut self, action: &Action) -> Result<Step, SamoError> {
        let step = self.inner.step(action)?;
        self.push_frame(step.obs);
        Ok(Step {
            obs: self.stacked(),
            reward: step.reward,
            done: step.done,
            info: step.info,
        })
    }

    fn agent_pose(&self) -> Option<(f64, f64, f64)> {
        self.inner.agent_pose()
    }
}

/// Environment factory. Known names: `corridor`, `color_corridor`,
/// `goal_corridor`, `two_zone`.
pub fn make_env(name: &str, k_frames: usize, max_steps: u32, _seed: u64) -> Result<Box<dyn Environment>, SamoError> {
    match name {
        "corridor" => Ok(Box::new(FrameStack::new(CorridorEnv::stay_alive(max_steps)?, k_frames))),
        "color_corridor" => Ok(Box::new(FrameStack::new(CorridorEnv::color(max_steps)?, k_frames))),
        "goal_corridor" => Ok(Box::new(FrameStack::new(GoalCorridorEnv::new(max_steps), k_frames))),
        "two_zone" => Ok(Box::new(FrameStack::new(TwoZoneEnv::new(max_steps), k_frames))),
        other => Err(SamoError::Config(format!("unknown environment '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factory_builds_known_envs() {
        let e = make_env("corridor", 10, 400, 0).unwrap();
        assert_eq!(e.action_space(), ActionSpace::Continuous { dim: 1 });
        assert_eq!(e.obs_dim(), 90);

        let e = make_env("two_zone", 1, 200, 0).unwrap();
        assert_eq!(e.action_space(), ActionSpace::Discrete { n: 2 });

        assert!(matches!(
            make_env("atari", 1, 100, 0),
            Err(SamoError::Config(_))
        ));
    }

    #[test]
    fn frame_stack_zero_pads_and_rolls() {
        let mut env = FrameStack::new(TwoZoneEnv::new(50), 3);
        let obs = env.reset(1);
        assert_eq!(obs.len(), 30);
        // Two oldest frames are zero padding.
        assert!(obs[..20].iter().all(|&v| v == 0.0));
        assert!((obs[20..].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let pos = obs[20..].iter().position(|&v| v == 1.0).unwrap();
        let correct = if pos < 5 { 0 } else { 1 };
        let step = env.step(&Action::Discrete(correct)).unwrap();
        assert!(step.obs[..10].iter().all(|&v| v == 0.0));
        assert!((step.obs[10..20].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
