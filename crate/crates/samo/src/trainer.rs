//! Sequential option training and execution.
//!
//! One option trains at a time against the frozen set: in states the
//! previous prefix already handles, its cascade action is executed and no
//! training data is stored (delegation); in states classified as
//! termination the new policy acts, the transition is stored with the
//! termination reward, and the SAC learner plus the new prefix termination
//! function update. When the temperature falls below the maturity
//! threshold (or the step budget runs out) the option freezes, composite
//! rollouts fill a labeled pool, and the new termination function is
//! retrained with balanced binary cross entropy.

use rand_chacha::ChaCha8Rng;

use crate::cascade::{cascade_peek, select_action_cascade, select_action_cascade_tmin, shaped_reward, ExecState};
use crate::envs::Environment;
use crate::error::SamoError;
use crate::options::{FrozenOption, OptionSet};
use crate::policy::{Action, ActionSpace};
use crate::replay::{ReplayBuffer, Transition};
use crate::rng::{next_seed, stream_rng, Stream};
use crate::sac::{SacHyper, SacLearner, WARMUP_STEPS};
use crate::termination::{geometric_labels, LabeledPool, TerminationFn};

/// Capacity of the post-freeze rollout pool for BCE retraining.
pub const BCE_POOL_CAP: usize = 1000;
/// BCE retraining epochs over the pool.
pub const BCE_EPOCHS: usize = 100;
/// Upper bounds on the label-gathering rollouts after a freeze.
const MAX_ROLLOUT_EPISODES: usize = 30;
const MAX_ROLLOUT_STEPS: u64 = 8_000;

/// Trainer-level settings distilled from the run configuration.
#[derive(Debug, Clone)]
pub struct TrainSettings {
    pub sac: SacHyper,
    pub buffer: usize,
    pub alpha_min: f64,
    pub gamma_beta: f64,
    pub max_options: usize,
    pub t_min: u32,
    pub shaping: bool,
    /// Env-step budget for one option's training phase.
    pub step_budget: u64,
    /// Env-step budget for the whole run.
    pub total_steps: u64,
    /// BCE-retrain the first prefix function (off reproduces the plain
    /// navigation setting where prefix 1 stays TD-only).
    pub bce_prefix1: bool,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            sac: SacHyper::default(),
            buffer: 10_000,
            alpha_min: 0.1,
            gamma_beta: 0.95,
            max_options: 3,
            t_min: 1,
            shaping: true,
            step_budget: 50_000,
            total_steps: 150_000,
            bce_prefix1: true,
        }
    }
}

/// Global step/episode counters, shared across phases of a run.
#[derive(Debug, Clone, Default)]
pub struct Counters {
    pub env_steps: u64,
    pub episodes: u64,
    /// Test hook: abort the run once this many env steps have happened,
    /// simulating a kill.
    pub hard_stop: Option<u64>,
}

impl Counters {
    fn stopped(&self) -> bool {
        self.hard_stop.is_some_and(|h| self.env_steps >= h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunEvent {
    None,
    OptionFrozen { mature: bool },
    BceDone,
}

/// One logged row; emitted per episode and on freeze/BCE events.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub env_step: u64,
    pub episode: u64,
    pub length: u32,
    pub undiscounted_return: f64,
    pub alpha: f64,
    /// Steps taken by each acting option within the episode (1-based
    /// option index, count); sorted by index.
    pub histogram: Vec<(usize, u32)>,
    pub option_count: usize,
    pub event: RunEvent,
}

pub trait MetricsSink {
    fn record(&mut self, rec: &EpisodeRecord) -> Result<(), SamoError>;
}

/// Sink that keeps everything in memory; used by tests and evaluation.
#[derive(Debug, Default)]
pub struct VecSink(pub Vec<EpisodeRecord>);

impl MetricsSink for VecSink {
    fn record(&mut self, rec: &EpisodeRecord) -> Result<(), SamoError> {
        self.0.push(rec.clone());
        Ok(())
    }
}

/// Per-episode accumulator.
#[derive(Debug, Default, Clone)]
struct EpisodeAccum {
    length: u32,
    ret: f64,
    hist: Vec<(usize, u32)>,
}

impl EpisodeAccum {
    fn bump(&mut self, actor: usize, reward: f64) {
        self.length += 1;
        self.ret += reward;
        match self.hist.iter_mut().find(|(i, _)| *i == actor) {
            Some((_, c)) => *c += 1,
            None => {
                self.hist.push((actor, 1));
                self.hist.sort_by_key(|(i, _)| *i);
            }
        }
    }
}

/// Outcome of one option's training phase.
#[derive(Debug, Clone, Copy)]
pub struct TrainOutcome {
    pub mature: bool,
    pub trained_steps: u64,
}

fn zero_action(space: ActionSpace) -> Action {
    match space {
        ActionSpace::Continuous { dim } => Action::Continuous(vec![0.0; dim]),
        ActionSpace::Discrete { .. } => Action::Discrete(0),
    }
}

struct EpisodeLogger<'a> {
    sink: &'a mut dyn MetricsSink,
    counters: &'a mut Counters,
    accum: EpisodeAccum,
    last: Option<EpisodeAccum>,
}

impl<'a> EpisodeLogger<'a> {
    fn new(sink: &'a mut dyn MetricsSink, counters: &'a mut Counters) -> Self {
        EpisodeLogger {
            sink,
            counters,
            accum: EpisodeAccum::default(),
            last: None,
        }
    }

    fn step(&mut self, actor: usize, reward: f64) {
        self.counters.env_steps += 1;
        self.accum.bump(actor, reward);
    }

    fn end_episode(&mut self, alpha: f64, option_count: usize) -> Result<(), SamoError> {
        self.counters.episodes += 1;
        let rec = EpisodeRecord {
            env_step: self.counters.env_steps,
            episode: self.counters.episodes,
            length: self.accum.length,
            undiscounted_return: self.accum.ret,
            alpha,
            histogram: self.accum.hist.clone(),
            option_count,
            event: RunEvent::None,
        };
        self.last = Some(std::mem::take(&mut self.accum));
        self.sink.record(&rec)
    }

    /// Drops an in-progress episode at a phase boundary; the environment
    /// resets when the next phase starts.
    fn abandon_episode(&mut self) {
        self.accum = EpisodeAccum::default();
    }

    /// Event rows reuse the in-progress episode when it has content,
    /// otherwise they duplicate the last finished one; duplicates are
    /// distinguishable by their non-none event.
    fn event(&mut self, event: RunEvent, alpha: f64, option_count: usize) -> Result<(), SamoError> {
        let stats = if self.accum.length >= 1 {
            self.accum.clone()
        } else if let Some(last) = &self.last {
            last.clone()
        } else {
            return Ok(());
        };
        let rec = EpisodeRecord {
            env_step: self.counters.env_steps,
            episode: self.counters.episodes,
            length: stats.length,
            undiscounted_return: stats.ret,
            alpha,
            histogram: stats.hist,
            option_count,
            event,
        };
        self.sink.record(&rec)
    }
}

/// Trains one new option against the frozen set and appends it, together
/// with its prefix termination function, to `set`.
pub fn train_option(
    env: &mut dyn Environment,
    set: &mut OptionSet,
    cfg: &TrainSettings,
    run_seed: u64,
    counters: &mut Counters,
    sink: &mut dyn MetricsSink,
) -> Result<TrainOutcome, SamoError> {
    let k = set.len() + 1;
    let obs_dim = env.obs_dim();
    let space = env.action_space();

    let mut init_rng = stream_rng(run_seed, Stream::Init, k);
    let mut env_rng = stream_rng(run_seed, Stream::Env, k);
    let mut policy_rng = stream_rng(run_seed, Stream::Policy, k);
    let mut buffer_rng = stream_rng(run_seed, Stream::Buffer, k);

    let mut learner = SacLearner::new(obs_dim, space, cfg.sac, &mut init_rng);
    let mut beta = if k == 1 {
        TerminationFn::new(obs_dim, space, 1, &mut init_rng)
    } else {
        TerminationFn::warm_start(set.termination(k - 1))
    };
    let mut replay = ReplayBuffer::new(cfg.buffer);
    let mut pending: Option<Transition> = None;

    let mut logger = EpisodeLogger::new(sink, counters);
    let mut obs = env.reset(next_seed(&mut env_rng));
    let mut exec = ExecState::reset(set.len());
    let mut trained_steps: u64 = 0;
    let mut phase_steps: u64 = 0;

    loop {
        if learner.is_mature(cfg.alpha_min)
            || phase_steps >= cfg.step_budget
            || logger.counters.env_steps >= cfg.total_steps
            || logger.counters.stopped()
        {
            break;
        }

        // Delegation: previous options act wherever their prefix still
        // classifies non-termination.
        let mut new_acted = true;
        let mut actor = k;
        let action = if set.is_empty() {
            pick_new_action(&learner, &obs, phase_steps, space, &mut policy_rng)?
        } else {
            let delegated = select_action_cascade(set, &obs, &mut exec, false, &mut policy_rng)?;
            if set.classify_prefix(set.len(), &obs, &delegated)? {
                exec = ExecState { active: 1, dwell: 0 };
                pick_new_action(&learner, &obs, phase_steps, space, &mut policy_rng)?
            } else {
                new_acted = false;
                actor = exec.active;
                delegated
            }
        };

        // The previous trained transition bootstraps with the action that
        // actually executes now.
        if let Some(mut t) = pending.take() {
            t.next_action = action.clone();
            replay.push(t);
        }

        let step = env.step(&action)?;
        logger.step(actor, step.reward);
        phase_steps += 1;

        let beta_reward = if step.done && step.info.is_failure() { 1.0 } else { 0.0 };

        if new_acted {
            let mut reward = step.reward;
            if !set.is_empty() && cfg.shaping {
                let next_proposal = cascade_peek(set, &step.obs, false, &mut policy_rng)?;
                let next_prev = set.classify_prefix(set.len(), &step.obs, &next_proposal)?;
                reward = shaped_reward(step.reward, next_prev, true);
            }
            let t = Transition {
                state: obs.clone(),
                action: action.clone(),
                next_state: step.obs.clone(),
                reward,
                beta_reward,
                done: step.done,
                next_action: zero_action(space),
            };
            if step.done {
                replay.push(t);
            } else {
                pending = Some(t);
            }
            trained_steps += 1;
        }

        // One gradient update of critics, policy, temperature and the new
        // prefix termination function per environment step (delegated
        // steps included) once the warmup has passed and the buffer holds
        // a batch of the new option's transitions.
        if phase_steps > WARMUP_STEPS && replay.len() >= cfg.sac.batch {
            let batch = replay.sample(cfg.sac.batch, &mut buffer_rng);
            learner.update(&batch, &mut policy_rng)?;
            let batch = replay.sample(cfg.sac.batch, &mut buffer_rng);
            beta.td_update(&batch, cfg.gamma_beta, cfg.sac.lr)?;
        }

        if step.done {
            logger.end_episode(learner.alpha(), set.len())?;
            obs = env.reset(next_seed(&mut env_rng));
            exec = ExecState::reset(set.len());
            pending = None;
        } else {
            obs = step.obs;
        }
    }

    if logger.counters.stopped() {
        return Err(SamoError::Interrupted);
    }
    let mature = learner.is_mature(cfg.alpha_min);
    let (head, alpha) = learner.into_frozen();
    logger.event(RunEvent::OptionFrozen { mature }, alpha, set.len())?;
    logger.abandon_episode();
    set.push(FrozenOption { head, alpha, mature }, beta);

    // Post-freeze: composite rollouts label a pool for BCE retraining of
    // the new prefix function.
    let retrain = k > 1 || cfg.bce_prefix1;
    if retrain && logger.counters.env_steps < cfg.total_steps {
        let mut rollout_env_rng = stream_rng(run_seed ^ 0x5151, Stream::Rollout, k);
        let mut rollout_policy_rng = stream_rng(run_seed ^ 0x9a9a, Stream::Rollout, k);
        let mut pool = LabeledPool::new(BCE_POOL_CAP);
        let mut episodes_rolled = 0;
        let rollout_stop = logger.counters.env_steps + MAX_ROLLOUT_STEPS;
        // Keep rolling past a full pool while one label class is missing;
        // the ring overwrites old records, so a late failure still lands.
        while !(pool.is_full() && pool.has_both_sides())
            && episodes_rolled < MAX_ROLLOUT_EPISODES
            && logger.counters.env_steps < cfg.total_steps.min(rollout_stop)
            && !logger.counters.stopped()
        {
            let mut obs = env.reset(next_seed(&mut rollout_env_rng));
            let mut exec = ExecState::reset(set.len());
            let mut traj: Vec<(Vec<f64>, Action)> = Vec::new();
            let mut failed = false;
            loop {
                let action = select_action_cascade_tmin(
                    set,
                    &obs,
                    &mut exec,
                    cfg.t_min,
                    false,
                    &mut rollout_policy_rng,
                )?;
                traj.push((obs.clone(), action.clone()));
                let step = env.step(&action)?;
                logger.step(exec.active, step.reward);
                if step.done {
                    failed = step.info.is_failure();
                    logger.end_episode(alpha, set.len())?;
                    break;
                }
                obs = step.obs;
                if logger.counters.env_steps >= cfg.total_steps.min(rollout_stop)
                    || logger.counters.stopped()
                {
                    logger.end_episode(alpha, set.len())?;
                    break;
                }
            }
            episodes_rolled += 1;
            let labels = geometric_labels(traj.len().max(1), cfg.gamma_beta, failed);
            for ((state, action), y) in traj.into_iter().zip(labels) {
                pool.push(state, action, y);
            }
        }
        if logger.counters.stopped() {
            return Err(SamoError::Interrupted);
        }
        let mut bce_rng = stream_rng(run_seed ^ 0x77aa, Stream::Buffer, k);
        set.last_termination_mut()
            .bce_train(&pool, BCE_EPOCHS, cfg.sac.batch, cfg.sac.lr, &mut bce_rng)?;
    }
    logger.event(RunEvent::BceDone, alpha, set.len())?;
    Ok(TrainOutcome { mature, trained_steps })
}

fn pick_new_action(
    learner: &SacLearner,
    obs: &[f64],
    phase_steps: u64,
    space: ActionSpace,
    rng: &mut ChaCha8Rng,
) -> Result<Action, SamoError> {
    if phase_steps < WARMUP_STEPS {
        Ok(space.uniform_random(rng))
    } else {
        learner.head.act(obs, false, rng)
    }
}

/// Plain SAC for the full budget: no options, no termination machinery,
/// no freeze events. Returns the final policy and temperature.
pub fn run_sac_baseline(
    env: &mut dyn Environment,
    cfg: &TrainSettings,
    run_seed: u64,
    counters: &mut Counters,
    sink: &mut dyn MetricsSink,
) -> Result<(FrozenOption, TerminationFn), SamoError> {
    let obs_dim = env.obs_dim();
    let space = env.action_space();
    let mut init_rng = stream_rng(run_seed, Stream::Init, 1);
    let mut env_rng = stream_rng(run_seed, Stream::Env, 1);
    let mut policy_rng = stream_rng(run_seed, Stream::Policy, 1);
    let mut buffer_rng = stream_rng(run_seed, Stream::Buffer, 1);

    let mut learner = SacLearner::new(obs_dim, space, cfg.sac, &mut init_rng);
    // Kept untrained; only present so baseline checkpoints share the
    // option-set layout.
    let beta = TerminationFn::new(obs_dim, space, 1, &mut init_rng);
    let mut replay = ReplayBuffer::new(cfg.buffer);

    let mut logger = EpisodeLogger::new(sink, counters);
    let mut obs = env.reset(next_seed(&mut env_rng));
    let mut steps: u64 = 0;

    while logger.counters.env_steps < cfg.total_steps && !logger.counters.stopped() {
        let action = pick_new_action(&learner, &obs, steps, space, &mut policy_rng)?;
        let step = env.step(&action)?;
        logger.step(1, step.reward);
        steps += 1;
        replay.push(Transition {
            state: obs.clone(),
            action: action.clone(),
            next_state: step.obs.clone(),
            reward: step.reward,
            beta_reward: if step.done && step.info.is_failure() { 1.0 } else { 0.0 },
            done: step.done,
            next_action: zero_action(space),
        });
        if steps > WARMUP_STEPS && replay.len() >= cfg.sac.batch {
            let batch = replay.sample(cfg.sac.batch, &mut buffer_rng);
            learner.update(&batch, &mut policy_rng)?;
        }
        if step.done {
            logger.end_episode(learner.alpha(), 1)?;
            obs = env.reset(next_seed(&mut env_rng));
        } else {
            obs = step.obs;
        }
    }
    if logger.counters.stopped() {
        return Err(SamoError::Interrupted);
    }
    if logger.accum.length >= 1 {
        logger.end_episode(learner.alpha(), 1)?;
    }
    let mature = learner.is_mature(cfg.alpha_min);
    let (head, alpha) = learner.into_frozen();
    Ok((FrozenOption { head, alpha, mature }, beta))
}

/// Trains options sequentially until `max_options`, then fills the
/// remaining step budget with composite rollouts. `max_options = 1` runs
/// the plain SAC baseline for the whole budget instead. The checkpoint
/// hook fires after every completed option.
pub fn train_all(
    env: &mut dyn Environment,
    cfg: &TrainSettings,
    run_seed: u64,
    mut set: OptionSet,
    counters: &mut Counters,
    sink: &mut dyn MetricsSink,
    checkpoint_hook: &mut dyn FnMut(&OptionSet) -> Result<(), SamoError>,
) -> Result<OptionSet, SamoError> {
    assert!(cfg.max_options >= 1);
    if cfg.max_options == 1 {
        let (option, beta) = run_sac_baseline(env, cfg, run_seed, counters, sink)?;
        let mut out = OptionSet::new(cfg.gamma_beta);
        out.push(option, beta);
        checkpoint_hook(&out)?;
        return Ok(out);
    }

    for _ in set.len()..cfg.max_options {
        if counters.env_steps >= cfg.total_steps {
            break;
        }
        train_option(env, &mut set, cfg, run_seed, counters, sink)?;
        checkpoint_hook(&set)?;
    }

    // Budget filler: keep executing (and logging) the trained cascade.
    let mut env_rng = stream_rng(run_seed, Stream::Filler, 0);
    let mut policy_rng = stream_rng(run_seed, Stream::Filler, 1);
    let alpha = set.options().last().map_or(1.0, |o| o.alpha);
    let mut logger = EpisodeLogger::new(sink, counters);
    while logger.counters.env_steps < cfg.total_steps && !logger.counters.stopped() {
        let mut obs = env.reset(next_seed(&mut env_rng));
        let mut exec = ExecState::reset(set.len());
        loop {
            let action =
                select_action_cascade_tmin(&set, &obs, &mut exec, cfg.t_min, false, &mut policy_rng)?;
            let step = env.step(&action)?;
            logger.step(exec.active, step.reward);
            if step.done || logger.counters.env_steps >= cfg.total_steps || logger.counters.stopped() {
                logger.end_episode(alpha, set.len())?;
                break;
            }
            obs = step.obs;
        }
    }
    if counters.stopped() {
        return Err(SamoError::Interrupted);
    }
    Ok(set)
}
