//! Checkpoint evaluation: runs the execution cascade (greedy by default)
//! and reports episode statistics, goal success and per-option occupancy.
//! Also exports trajectory traces for external visualization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cascade::{select_action_cascade_tmin, ExecState};
use crate::envs::{Environment, StepInfo};
use crate::error::SamoError;
use crate::options::OptionSet;
use crate::policy::Action;
use crate::rng::{next_seed, stream_rng, Stream};

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub episodes: usize,
    pub mean_length: f64,
    pub min_length: u32,
    pub max_length: u32,
    pub mean_return: f64,
    /// Fraction of episodes ending at the goal; None for environments
    /// without goals.
    pub goal_success: Option<f64>,
    /// Fraction of steps each option acted (1-based index order; sums
    /// to 1).
    pub occupancy: Vec<f64>,
}

impl EvalReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "episodes {}  mean_len {:.2}  min {}  max {}  mean_return {:.3}",
            self.episodes, self.mean_length, self.min_length, self.max_length, self.mean_return
        );
        if let Some(g) = self.goal_success {
            s.push_str(&format!("  goal_success {:.3}", g));
        }
        s.push_str("  occupancy ");
        s.push_str(
            &self
                .occupancy
                .iter()
                .enumerate()
                .map(|(i, f)| format!("{}:{:.3}", i + 1, f))
                .collect::<Vec<_>>()
                .join(" "),
        );
        s
    }
}

/// Runs `episodes` cascade episodes and aggregates the report.
pub fn evaluate(
    set: &OptionSet,
    env: &mut dyn Environment,
    episodes: usize,
    greedy: bool,
    t_min: u32,
    eval_seed: u64,
) -> Result<EvalReport, SamoError> {
    assert!(episodes >= 1);
    let mut env_rng = stream_rng(eval_seed, Stream::Eval, 0);
    let mut policy_rng = stream_rng(eval_seed, Stream::Eval, 1);
    let mut lengths = Vec::with_capacity(episodes);
    let mut returns = Vec::with_capacity(episodes);
    let mut goals = 0usize;
    let mut saw_goal_env = false;
    let mut occupancy = vec![0u64; set.len()];
    for _ in 0..episodes {
        let mut obs = env.reset(next_seed(&mut env_rng));
        let mut exec = ExecState::reset(set.len());
        let mut len = 0u32;
        let mut ret = 0.0;
        loop {
            let action = select_action_cascade_tmin(set, &obs, &mut exec, t_min, greedy, &mut policy_rng)?;
            let step = env.step(&action)?;
            occupancy[exec.active - 1] += 1;
            len += 1;
            ret += step.reward;
            if step.done {
                match step.info {
                    StepInfo::Goal => {
                        saw_goal_env = true;
                        goals += 1;
                    }
                    StepInfo::WrongCorridor => saw_goal_env = true,
                    _ => {}
                }
                break;
            }
            obs = step.obs;
        }
        lengths.push(len);
        returns.push(ret);
    }
    let total_steps: u64 = occupancy.iter().sum();
    Ok(EvalReport {
        episodes,
        mean_length: lengths.iter().map(|&l| l as f64).sum::<f64>() / episodes as f64,
        min_length: *lengths.iter().min().unwrap(),
        max_length: *lengths.iter().max().unwrap(),
        mean_return: returns.iter().sum::<f64>() / episodes as f64,
        goal_success: if saw_goal_env {
            Some(goals as f64 / episodes as f64)
        } else {
            None
        },
        occupancy: occupancy
            .iter()
            .map(|&c| c as f64 / total_steps.max(1) as f64)
            .collect(),
    })
}

/// Writes greedy trajectory traces as CSV rows of
/// `(episode, step, x, y, theta, action, reward, active_option)`.
pub fn trace(
    set: &OptionSet,
    env: &mut dyn Environment,
    episodes: usize,
    t_min: u32,
    eval_seed: u64,
    out: &Path,
) -> Result<(), SamoError> {
    let mut env_rng = stream_rng(eval_seed, Stream::Eval, 0);
    let mut policy_rng = stream_rng(eval_seed, Stream::Eval, 1);
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "episode,step,x,y,theta,action,reward,active_option")?;
    for ep in 0..episodes {
        let mut obs = env.reset(next_seed(&mut env_rng));
        let mut exec = ExecState::reset(set.len());
        let mut step_idx = 0u32;
        loop {
            let action = select_action_cascade_tmin(set, &obs, &mut exec, t_min, true, &mut policy_rng)?;
            let step = env.step(&action)?;
            let (x, y, theta) = env.agent_pose().unwrap_or((0.0, 0.0, 0.0));
            let a_str = match &action {
                Action::Continuous(v) => v
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("|"),
                Action::Discrete(i) => i.to_string(),
            };
            writeln!(
                w,
                "{ep},{step_idx},{x},{y},{theta},{a_str},{},{}",
                step.reward, exec.active
            )?;
            step_idx += 1;
            if step.done {
                break;
            }
            obs = step.obs;
        }
    }
    w.flush()?;
    Ok(())
}
