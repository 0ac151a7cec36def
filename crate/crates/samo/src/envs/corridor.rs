//! Stay-alive corridor navigation with ray-cast observations.
//!
//! The agent is a kinematic point moving at constant speed; the action is
//! one continuous steering value in [-1, 1] turning the heading by up to
//! 30 degrees per step. Hitting any wall ends the episode with reward -1;
//! every other step is reward 0. The color variant appends a per-ray
//! color one-hot and cues each junction with painted wall blocks, with a
//! dead-end stub on the wrong side.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::geometry::{FreeSpace, Rect};
use super::map::{CorridorMap, Turn, WallColor, COLOR_CUES, TRAIN_2TURN};
use super::{Environment, Step, StepInfo};
use crate::error::SamoError;
use crate::policy::{Action, ActionSpace};

pub const N_RAYS: usize = 9;
pub const SPEED: f64 = 0.35;
pub const MAX_RANGE: f64 = 8.0;
/// Maximum heading change per step (30 degrees times the action).
pub const TURN_RATE: f64 = std::f64::consts::PI / 6.0;
/// Length of the painted cue blocks before a junction.
const PAINT_LEN: f64 = 4.0;
/// Length of the wrong-way stub at cued junctions.
const DEAD_END_LEN: f64 = 4.0;

#[derive(Debug, Clone, Copy)]
struct Spawn {
    x: f64,
    y: f64,
    heading: f64,
}

pub struct CorridorEnv {
    free: FreeSpace,
    paint: Vec<(Rect, WallColor)>,
    spawns: [Spawn; 2],
    color_features: bool,
    half_width: f64,
    max_steps: u32,
    // Episode state.
    x: f64,
    y: f64,
    heading: f64,
    steps: u32,
    done: bool,
}

/// Axis direction of a segment while walking the centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dir {
    dx: f64,
    dy: f64,
}

impl Dir {
    const EAST: Dir = Dir { dx: 1.0, dy: 0.0 };

    fn turned(self, turn: Turn) -> Dir {
        match turn {
            Turn::Left => Dir { dx: -self.dy, dy: self.dx },
            Turn::Right => Dir { dx: self.dy, dy: -self.dx },
            Turn::None => self,
        }
    }

    fn heading(self) -> f64 {
        self.dy.atan2(self.dx)
    }
}

/// Rectangle covering the centerline from `a` to `b` dilated by `w`.
fn dilate(ax: f64, ay: f64, bx: f64, by: f64, w: f64) -> Rect {
    Rect::new(ax.min(bx) - w, ay.min(by) - w, ax.max(bx) + w, ay.max(by) + w)
}

impl CorridorEnv {
    /// Plain stay-alive corridor on the built-in two-turn training map.
    pub fn stay_alive(max_steps: u32) -> Result<Self, SamoError> {
        Self::from_map(&CorridorMap::parse(TRAIN_2TURN)?, false, max_steps)
    }

    /// Color-cued corridor on the built-in cue map.
    pub fn color(max_steps: u32) -> Result<Self, SamoError> {
        Self::from_map(&CorridorMap::parse(COLOR_CUES)?, true, max_steps)
    }

    /// Builds the free space, cue paint and spawns from a map. Junctions
    /// after a colored segment grow a dead-end stub opposite the real turn
    /// and a painted block telling the agent which way to go: the block
    /// sits on the turn side when green, on the stub side when red.
    pub fn from_map(map: &CorridorMap, color_features: bool, max_steps: u32) -> Result<Self, SamoError> {
        let w = map.half_width;
        let mut rects = Vec::new();
        let mut paint = Vec::new();
        let (mut x, mut y) = (0.0, 0.0);
        let mut dir = Dir::EAST;
        let spawn_a = Spawn { x, y, heading: dir.heading() };
        let mut last_dir = dir;
        for seg in &map.segments {
            let (ex, ey) = (x + dir.dx * seg.length, y + dir.dy * seg.length);
            rects.push(dilate(x, y, ex, ey, w));
            if seg.color != WallColor::None && seg.turn != Turn::None {
                let stub_dir = dir.turned(opposite(seg.turn));
                let (sx, sy) = (ex + stub_dir.dx * DEAD_END_LEN, ey + stub_dir.dy * DEAD_END_LEN);
                rects.push(dilate(ex, ey, sx, sy, w));
                let cue_side = match seg.color {
                    WallColor::Green => dir.turned(seg.turn),
                    WallColor::Red => stub_dir,
                    WallColor::None => unreachable!(),
                };
                paint.push((cue_block(x, y, ex, ey, dir, cue_side, w), seg.color));
            }
            last_dir = dir;
            dir = dir.turned(seg.turn);
            x = ex;
            y = ey;
        }
        let spawn_b = Spawn {
            x,
            y,
            heading: (-last_dir.dy).atan2(-last_dir.dx),
        };
        Ok(CorridorEnv {
            free: FreeSpace::new(rects),
            paint,
            spawns: [spawn_a, spawn_b],
            color_features,
            half_width: w,
            max_steps,
            x: spawn_a.x,
            y: spawn_a.y,
            heading: spawn_a.heading,
            steps: 0,
            done: true,
        })
    }

    fn frame_dim(&self) -> usize {
        if self.color_features {
            N_RAYS * 4
        } else {
            N_RAYS
        }
    }

    /// Ray fan over +-90 degrees relative to the heading; distances
    /// normalized by the maximum range. The color variant appends one
    /// (none, green, red) one-hot per ray.
    fn observe(&self) -> Vec<f64> {
        let mut obs = Vec::with_capacity(self.frame_dim());
        let mut colors = Vec::new();
        for i in 0..N_RAYS {
            let rel = -std::f64::consts::FRAC_PI_2
                + std::f64::consts::PI * (i as f64) / ((N_RAYS - 1) as f64);
            let ang = self.heading + rel;
            let (dx, dy) = (ang.cos(), ang.sin());
            let dist = self.free.free_distance(self.x, self.y, dx, dy, MAX_RANGE);
            obs.push(dist / MAX_RANGE);
            if self.color_features {
                let mut one_hot = [1.0, 0.0, 0.0];
                if dist < MAX_RANGE {
                    let (hx, hy) = (self.x + dx * dist, self.y + dy * dist);
                    for (rect, color) in &self.paint {
                        if rect.contains(hx, hy) {
                            one_hot = match color {
                                WallColor::Green => [0.0, 1.0, 0.0],
                                WallColor::Red => [0.0, 0.0, 1.0],
                                WallColor::None => [1.0, 0.0, 0.0],
                            };
                            break;
                        }
                    }
                }
                colors.extend_from_slice(&one_hot);
            }
        }
        obs.extend(colors);
        obs
    }
}

fn opposite(turn: Turn) -> Turn {
    match turn {
        Turn::Left => Turn::Right,
        Turn::Right => Turn::Left,
        Turn::None => Turn::None,
    }
}

/// Painted block hugging one side wall of the approach segment, ending
/// where the junction opening begins.
fn cue_block(ax: f64, ay: f64, ex: f64, ey: f64, dir: Dir, side: Dir, w: f64) -> Rect {
    // Wall line offset to the cue side; block straddles the wall so ray
    // hit points land inside it.
    let along = PAINT_LEN.min(((ex - ax).abs() + (ey - ay).abs()) * 0.5);
    let (end_x, end_y) = (ex - dir.dx * w, ey - dir.dy * w);
    let (start_x, start_y) = (end_x - dir.dx * along, end_y - dir.dy * along);
    let (wall_x, wall_y) = (side.dx * w, side.dy * w);
    Rect::new(
        start_x + wall_x - 0.2 * side.dx.abs(),
        start_y + wall_y - 0.2 * side.dy.abs(),
        end_x + wall_x + 0.2 * side.dx.abs(),
        end_y + wall_y + 0.2 * side.dy.abs(),
    )
}

impl Environment for CorridorEnv {
    fn action_space(&self) -> ActionSpace {
        ActionSpace::Continuous { dim: 1 }
    }

    fn obs_dim(&self) -> usize {
        self.frame_dim()
    }

    fn max_steps(&self) -> u32 {
        self.max_steps
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spawn = self.spawns[rng.gen_range(0..2usize)];
        let lateral: f64 = rng.gen_range(-0.4..0.4) * self.half_width;
        let jitter: f64 = rng.gen_range(-0.175..0.175);
        let perp = spawn.heading + std::f64::consts::FRAC_PI_2;
        self.x = spawn.x + perp.cos() * lateral;
        self.y = spawn.y + perp.sin() * lateral;
        self.heading = spawn.heading + jitter;
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

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::map::Segment;

    fn straight_map(len: f64) -> CorridorMap {
        CorridorMap {
            half_width: 1.0,
            segments: vec![Segment {
                length: len,
                turn: Turn::None,
                color: WallColor::None,
            }],
        }
    }

    /// Reset into a pinned pose for geometry checks.
    fn pin(env: &mut CorridorEnv, x: f64, y: f64, heading: f64) {
        env.reset(0);
        env.x = x;
        env.y = y;
        env.heading = heading;
    }

    #[test]
    fn forced_collision_ends_episode() {
        let mut env = CorridorEnv::from_map(&straight_map(20.0), false, 400).unwrap();
        pin(&mut env, 19.9, 0.0, 0.0); // end wall at x = 21, but heading in
        env.x = 20.9; // closer than one speed step
        let step = env.step(&Action::Continuous(vec![0.0])).unwrap();
        assert_eq!(step.reward, -1.0);
        assert!(step.done);
        assert_eq!(step.info, StepInfo::Failure);
        assert!(matches!(
            env.step(&Action::Continuous(vec![0.0])),
            Err(SamoError::Usage(_))
        ));
    }

    #[test]
    fn forward_ray_shrinks_by_speed_over_range() {
        let mut env = CorridorEnv::from_map(&straight_map(20.0), false, 400).unwrap();
        pin(&mut env, 14.0, 0.0, 0.0); // forward wall at x = 21: 7m ahead
        let before = env.observe()[N_RAYS / 2];
        let step = env.step(&Action::Continuous(vec![0.0])).unwrap();
        let after = step.obs[N_RAYS / 2];
        assert!((before - after - SPEED / MAX_RANGE).abs() < 1e-12, "{before} -> {after}");
    }

    #[test]
    fn same_seed_resets_identically() {
        let mut env = CorridorEnv::stay_alive(400).unwrap();
        let a = env.reset(99);
        let b = env.reset(99);
        assert_eq!(a, b);
        let c = env.reset(100);
        assert_ne!(a, c);
    }

    #[test]
    fn trajectories_are_bit_exact_for_seed_and_actions() {
        let mut e1 = CorridorEnv::stay_alive(400).unwrap();
        let mut e2 = CorridorEnv::stay_alive(400).unwrap();
        e1.reset(7);
        e2.reset(7);
        let actions = [0.0, 0.3, -0.5, 1.0, -1.0, 0.2, 0.0, 0.1];
        for a in actions {
            let s1 = e1.step(&Action::Continuous(vec![a])).unwrap();
            let s2 = e2.step(&Action::Continuous(vec![a])).unwrap();
            assert_eq!(s1.obs, s2.obs);
            assert_eq!(s1.reward, s2.reward);
            if s1.done {
                break;
            }
        }
    }

    #[test]
    fn rewards_stay_in_alphabet_and_position_stays_free() {
        let mut env = CorridorEnv::stay_alive(400).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ep in 0..5 {
            env.reset(ep);
            loop {
                let a = rng.gen_range(-1.0..1.0);
                let step = env.step(&Action::Continuous(vec![a])).unwrap();
                assert!(step.reward == 0.0 || step.reward == -1.0);
                assert!(step.obs.iter().all(|&v| (0.0..=1.0).contains(&v)));
                let (x, y, _) = env.agent_pose().unwrap();
                if !step.done {
                    assert!(env.free.contains(x, y));
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn episode_never_exceeds_cap() {
        let mut env = CorridorEnv::from_map(&straight_map(1000.0), false, 50).unwrap();
        pin(&mut env, 0.0, 0.0, 0.0);
        let mut n = 0;
        loop {
            let step = env.step(&Action::Continuous(vec![0.0])).unwrap();
            n += 1;
            if step.done {
                assert_eq!(step.info, StepInfo::Cap);
                assert_eq!(step.reward, 0.0);
                break;
            }
        }
        assert_eq!(n, 50);
    }

    #[test]
    fn color_rays_report_green_cue() {
        let map = CorridorMap {
            half_width: 1.0,
            segments: vec![
                Segment { length: 12.0, turn: Turn::Left, color: WallColor::Green },
                Segment { length: 10.0, turn: Turn::None, color: WallColor::None },
            ],
        };
        let mut env = CorridorEnv::from_map(&map, true, 400).unwrap();
        // Stand before the junction looking along the corridor; the green
        // block is on the left wall just before the turn opening.
        pin(&mut env, 6.0, 0.0, 0.0);
        let obs = env.observe();
        let colors = &obs[N_RAYS..];
        let green_hits = (0..N_RAYS).filter(|i| colors[i * 3 + 1] == 1.0).count();
        assert!(green_hits > 0, "no ray saw the green cue: {colors:?}");
        // And rays that miss paint are 'none'.
        let none_hits = (0..N_RAYS).filter(|i| colors[i * 3] == 1.0).count();
        assert!(none_hits > 0);
    }

    #[test]
    fn wrong_turn_at_red_junction_fails_quickly() {
        let map = CorridorMap {
            half_width: 1.0,
            segments: vec![
                Segment { length: 12.0, turn: Turn::Left, color: WallColor::Red },
                Segment { length: 10.0, turn: Turn::None, color: WallColor::None },
            ],
        };
        let mut env = CorridorEnv::from_map(&map, true, 400).unwrap();
        // Drive scripted into the wrong-way stub (right turn at the
        // junction, i.e. south) and hold straight: must fail within the
        // stub length plus corner room.
        pin(&mut env, 11.0, 0.0, 0.0);
        // Turn hard right across three steps, then go straight.
        let mut steps = 0;
        let mut ended = false;
        for t in 0..40 {
            let a = if t < 3 { -1.0 } else { 0.0 };
            let step = env.step(&Action::Continuous(vec![a])).unwrap();
            steps += 1;
            if step.done {
                assert_eq!(step.info, StepInfo::Failure);
                ended = true;
                break;
            }
        }
        assert!(ended, "wrong turn did not fail");
        let budget = ((DEAD_END_LEN + 2.0) / SPEED).ceil() as usize + 3;
        assert!(steps <= budget, "took {steps} > {budget}");
    }

    #[test]
    fn correct_turn_at_cued_junction_continues() {
        let map = CorridorMap {
            half_width: 1.0,
            segments: vec![
                Segment { length: 12.0, turn: Turn::Left, color: WallColor::Green },
                Segment { length: 12.0, turn: Turn::None, color: WallColor::None },
            ],
        };
        let mut env = CorridorEnv::from_map(&map, true, 400).unwrap();
        pin(&mut env, 11.0, 0.0, 0.0);
        // Turn hard left across three steps, then straight up the new leg.
        for t in 0..20 {
            let a = if t < 3 { 1.0 } else { 0.0 };
            let step = env.step(&Action::Continuous(vec![a])).unwrap();
            assert!(!step.done, "died at t={t}");
        }
        let (_, y, _) = env.agent_pose().unwrap();
        assert!(y > 3.0, "did not progress into the turn: y = {y}");
    }
}
