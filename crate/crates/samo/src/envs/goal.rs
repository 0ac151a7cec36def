//! Instruction-conditioned goal corridors: a stem leading to a three-way
//! junction with left, center and right branches. A one-hot instruction
//! fixed at reset tells the agent which branch holds the goal.
//!
//! Rewards: +1 on entering the instructed branch's goal zone, -1 on
//! collision, -0.5 on committing to a wrong branch (episode ends), 0
//! otherwise.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::corridor::{MAX_RANGE, N_RAYS, SPEED, TURN_RATE};
use super::geometry::{FreeSpace, Rect};
use super::{Environment, Step, StepInfo};
use crate::error::SamoError;
use crate::policy::{Action, ActionSpace};

const HALF_WIDTH: f64 = 1.0;
const STEM_LEN: f64 = 8.0;
const BRANCH_LEN: f64 = 8.0;
/// Depth into a branch (past the junction box) that commits the agent.
const COMMIT: f64 = 1.0;
/// Length of the goal zone at the end of the instructed branch.
const GOAL_DEPTH: f64 = 2.0;

/// Branch indices follow the instruction one-hot: left, center, right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Left,
    Center,
    Right,
}

pub struct GoalCorridorEnv {
    free: FreeSpace,
    max_steps: u32,
    instruction: usize,
    x: f64,
    y: f64,
    heading: f64,
    steps: u32,
    done: bool,
}

impl GoalCorridorEnv {
    pub fn new(max_steps: u32) -> Self {
        let w = HALF_WIDTH;
        // Stem runs north from (0, -STEM_LEN) to the junction at the
        // origin; branches run west, north and east.
        let rects = vec![
            Rect::new(-w, -STEM_LEN - w, w, w),
            Rect::new(-BRANCH_LEN - w, -w, w, w),
            Rect::new(-w, -w, w, BRANCH_LEN + w),
            Rect::new(-w, -w, BRANCH_LEN + w, w),
        ];
        GoalCorridorEnv {
            free: FreeSpace::new(rects),
            max_steps,
            instruction: 1,
            x: 0.0,
            y: -STEM_LEN,
            heading: std::f64::consts::FRAC_PI_2,
            steps: 0,
            done: true,
        }
    }

    fn branch_of(&self) -> Option<Branch> {
        if self.x < -(HALF_WIDTH + COMMIT) {
            Some(Branch::Left)
        } else if self.x > HALF_WIDTH + COMMIT {
            Some(Branch::Right)
        } else if self.y > HALF_WIDTH + COMMIT {
            Some(Branch::Center)
        } else {
            None
        }
    }

    fn instructed(&self) -> Branch {
        match self.instruction {
            0 => Branch::Left,
            1 => Branch::Center,
            _ => Branch::Right,
        }
    }

    fn in_goal_zone(&self, branch: Branch) -> bool {
        let depth_needed = BRANCH_LEN - GOAL_DEPTH;
        match branch {
            Branch::Left => self.x <= -depth_needed,
            Branch::Right => self.x >= depth_needed,
            Branch::Center => self.y >= depth_needed,
        }
    }

    /// Ray distances plus the instruction one-hot.
    fn observe(&self) -> Vec<f64> {
        let mut obs = Vec::with_capacity(N_RAYS + 3);
        for i in 0..N_RAYS {
            let rel = -std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * (i as f64) / ((N_RAYS - 1) as f64);
            let ang = self.heading + rel;
            let dist = self
                .free
                .free_distance(self.x, self.y, ang.cos(), ang.sin(), MAX_RANGE);
            obs.push(dist / MAX_RANGE);
        }
        let mut one_hot = [0.0; 3];
        one_hot[self.instruction] = 1.0;
        obs.extend_from_slice(&one_hot);
        obs
    }
}

impl Environment for GoalCorridorEnv {
    fn action_space(&self) -> ActionSpace {
        ActionSpace::Continuous { dim: 1 }
    }

    fn obs_dim(&self) -> usize {
        N_RAYS + 3
    }

    fn max_steps(&self) -> u32 {
        self.max_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.instruction = rng.gen_range(0..3usize);
        let lateral: f64 = rng.gen_range(-0.4..0.4) * HALF_WIDTH;
        let jitter: f64 = rng.gen_range(-0.175..0.175);
        self.x = lateral;
        self.y = -STEM_LEN;
        self.heading = std::f64::consts::FRAC_PI_2 + jitter;
        self.steps = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: &Action) -> Result<Step, SamoError> {
        if self.done {
            return Err(SamoError::Usage("step after episode end".into()));
        }
        let a = action.continuous()[0].clamp(-1.0, 1.0);
        self.heading += TURN_RATE * a;
        if self.heading > std::f64::consts::PI {
            self.heading -= 2.0 * std::f64::consts::PI;
        } else if self.heading < -std::f64::consts::PI {
            self.heading += 2.0 * std::f64::consts::PI;
        }
        let (dx, dy) = (self.heading.cos(), self.heading.sin());
        let clearance = self.free.free_distance(self.x, self.y, dx, dy, SPEED + 1.0);
        if clearance < SPEED {
            self.done = true;
            return Ok(Step {
                obs: self.observe(),
                reward: -1.0,
                done: true,
                info: StepInfo::Failure,
            });
        }
        self.x += dx * SPEED;
        self.y += dy * SPEED;
        self.steps += 1;

        if let Some(branch) = self.branch_of() {
            if branch == self.instructed() {
                if self.in_goal_zone(branch) {
                    self.done = true;
                    return Ok(Step {
                        obs: self.observe(),
                        reward: 1.0,
                        done: true,
                        info: StepInfo::Goal,
                    });
                }
            } else {
                self.done = true;
                return Ok(Step {
                    obs: self.observe(),
                    reward: -0.5,
                    done: true,
                    info: StepInfo::WrongCorridor,
                });
            }
        }

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
        Some((self.x, self.y, self.heading))
    }
}
