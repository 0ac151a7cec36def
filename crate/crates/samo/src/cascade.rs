//! Execution cascade over trained options and the inter-option shaping
//! reward.
//!
//! Each step the active option proposes an action and the full-prefix
//! termination function classifies it. On non-termination the cascade
//! walks the prefixes downward, handing control to the earliest option
//! whose prefix classifies its own proposed action as non-termination;
//! when every prefix classifies termination the last option acts.

use rand_chacha::ChaCha8Rng;

use crate::error::SamoError;
use crate::options::OptionSet;
use crate::policy::Action;

/// Cascade state carried across steps: the active option index (1-based)
/// and how long it has held control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecState {
    pub active: usize,
    pub dwell: u32,
}

impl ExecState {
    /// Episode-start state: the last option is active.
    pub fn reset(option_count: usize) -> Self {
        ExecState {
            active: option_count.max(1),
            dwell: 0,
        }
    }
}

/// Inter-option shaping: a training option that steers the system into a
/// state the previous prefix classifies as non-termination earns +1;
/// otherwise the raw reward passes through.
#[inline]
pub fn shaped_reward(raw_reward: f64, next_prev_terminates: bool, acting_is_new_option: bool) -> f64 {
    if acting_is_new_option && !next_prev_terminates {
        1.0
    } else {
        raw_reward
    }
}

/// One cascade selection. Samples from the incoming active option,
/// classifies with the full prefix, then walks prefixes downward while
/// they classify non-termination. Updates `exec` to the option that acts.
pub fn select_action_cascade(
    set: &OptionSet,
    state: &[f64],
    exec: &mut ExecState,
    greedy: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Action, SamoError> {
    let k = set.len();
    if k == 0 {
        return Err(SamoError::Usage("cascade over an empty option set".into()));
    }
    let incoming = exec.active.min(k).max(1);
    let mut action = set.option(incoming).head.act(state, greedy, rng)?;
    let full_terminates = set.classify_prefix(k, state, &action)?;
    let mut i = k;
    if !full_terminates {
        while i > 1 {
            let candidate = set.option(i - 1).head.act(state, greedy, rng)?;
            if set.classify_prefix(i - 1, state, &candidate)? {
                break;
            }
            action = candidate;
            i -= 1;
        }
    }
    exec.dwell = if i == exec.active { exec.dwell.saturating_add(1) } else { 1 };
    exec.active = i;
    Ok(action)
}

/// Cascade variant with a minimum dwell: the active option re-selects only
/// after holding control for `t_min` consecutive steps. `t_min = 1` is the
/// plain cascade.
pub fn select_action_cascade_tmin(
    set: &OptionSet,
    state: &[f64],
    exec: &mut ExecState,
    t_min: u32,
    greedy: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Action, SamoError> {
    assert!(t_min >= 1);
    if exec.dwell >= 1 && exec.dwell < t_min {
        let k = set.len();
        if k == 0 {
            return Err(SamoError::Usage("cascade over an empty option set".into()));
        }
        let active = exec.active.min(k).max(1);
        let action = set.option(active).head.act(state, greedy, rng)?;
        exec.dwell += 1;
        return Ok(action);
    }
    select_action_cascade(set, state, exec, greedy, rng)
}

/// Non-committal cascade query: what the option set would do at `state`,
/// without touching any persistent execution state. Used for the shaping
/// lookahead during option training.
pub fn cascade_peek(
    set: &OptionSet,
    state: &[f64],
    greedy: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Action, SamoError> {
    let mut scratch = ExecState::reset(set.len());
    select_action_cascade(set, state, &mut scratch, greedy, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, DenseNet};
    use crate::options::FrozenOption;
    use crate::policy::{ActionSpace, GaussianHead, PolicyHead};
    use crate::rng::{stream_rng, Stream};
    use crate::termination::{TerminationFn, DEFAULT_THRESHOLD};

    fn rng() -> ChaCha8Rng {
        stream_rng(0, Stream::Policy, 0)
    }

    fn const_head(mu: f64) -> PolicyHead {
        let mut net = DenseNet::zeros(&[2, 2], Activation::Tanh);
        net.params_mut()[4] = mu;
        net.params_mut()[5] = -20.0;
        PolicyHead::Gaussian(GaussianHead::from_net(net))
    }

    fn const_beta(prefix_len: usize, terminates: bool) -> TerminationFn {
        let mut net = DenseNet::zeros(&[3, 1], Activation::Tanh);
        let n = net.param_count();
        net.params_mut()[n - 1] = if terminates { 10.0 } else { -10.0 };
        TerminationFn::from_net(
            net,
            ActionSpace::Continuous { dim: 1 },
            2,
            prefix_len,
            DEFAULT_THRESHOLD,
        )
    }

    /// Three options with distinct greedy actions and mocked prefix
    /// classifiers.
    fn mock_set(betas: [bool; 3]) -> OptionSet {
        let mut set = OptionSet::new(0.95);
        for (i, terminates) in betas.iter().enumerate() {
            set.push(
                FrozenOption {
                    head: const_head(0.5 * (i + 1) as f64),
                    alpha: 0.05,
                    mature: true,
                },
                const_beta(i + 1, *terminates),
            );
        }
        set
    }

    fn greedy_action_of(option: usize) -> f64 {
        (0.5 * option as f64).tanh()
    }

    #[test]
    fn earliest_capable_option_wins() {
        // Every prefix classifies non-termination: the walk reaches option 1.
        let set = mock_set([false, false, false]);
        let mut exec = ExecState::reset(3);
        let a = select_action_cascade(&set, &[0.0, 0.0], &mut exec, true, &mut rng()).unwrap();
        assert_eq!(exec.active, 1);
        assert!((a.continuous()[0] - greedy_action_of(1)).abs() < 1e-12);
    }

    #[test]
    fn walk_stops_at_terminating_prefix() {
        // Prefix 1 terminates, prefix 2 and the full prefix do not: the
        // walk adopts option 2's action and stops there.
        let set = mock_set([true, false, false]);
        let mut exec = ExecState::reset(3);
        let a = select_action_cascade(&set, &[0.0, 0.0], &mut exec, true, &mut rng()).unwrap();
        assert_eq!(exec.active, 2);
        assert!((a.continuous()[0] - greedy_action_of(2)).abs() < 1e-12);
    }

    #[test]
    fn full_termination_falls_back_to_last_option() {
        let set = mock_set([true, true, true]);
        let mut exec = ExecState::reset(3);
        let a = select_action_cascade(&set, &[0.0, 0.0], &mut exec, true, &mut rng()).unwrap();
        assert_eq!(exec.active, 3);
        assert!((a.continuous()[0] - greedy_action_of(3)).abs() < 1e-12);
    }

    #[test]
    fn active_index_persists_and_feeds_next_proposal() {
        // Full prefix terminates, so the incoming active option's proposal
        // is executed and the index resets to k.
        let set = mock_set([true, true, true]);
        let mut exec = ExecState { active: 1, dwell: 5 };
        let a = select_action_cascade(&set, &[0.0, 0.0], &mut exec, true, &mut rng()).unwrap();
        // Proposal came from option 1 (the incoming index)...
        assert!((a.continuous()[0] - greedy_action_of(1)).abs() < 1e-12);
        // ...but the active index is now the fallback k.
        assert_eq!(exec.active, 3);
    }

    #[test]
    fn cascade_is_deterministic_with_greedy_heads() {
        let set = mock_set([true, false, false]);
        let mut e1 = ExecState::reset(3);
        let mut e2 = ExecState::reset(3);
        let a1 = select_action_cascade(&set, &[0.3, -0.1], &mut e1, true, &mut rng()).unwrap();
        let a2 = select_action_cascade(&set, &[0.3, -0.1], &mut e2, true, &mut rng()).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(e1, e2);
    }

    #[test]
    fn shaped_reward_cases() {
        // New option reaching a previous-prefix non-termination state.
        assert_eq!(shaped_reward(0.0, false, true), 1.0);
        // Survived but next state not handled by previous options.
        assert_eq!(shaped_reward(0.0, true, true), 0.0);
        // Episode-ending step passes the raw reward through.
        assert_eq!(shaped_reward(-1.0, true, true), -1.0);
        // Delegated steps never shape.
        assert_eq!(shaped_reward(-1.0, false, false), -1.0);
        assert_eq!(shaped_reward(0.0, false, false), 0.0);
    }

    #[test]
    fn tmin_one_equals_plain_cascade() {
        let set = mock_set([true, false, false]);
        let mut e1 = ExecState::reset(3);
        let mut e2 = ExecState::reset(3);
        for step in 0..5 {
            let s = [0.1 * step as f64, 0.0];
            let a1 = select_action_cascade(&set, &s, &mut e1, true, &mut rng()).unwrap();
            let a2 = select_action_cascade_tmin(&set, &s, &mut e2, 1, true, &mut rng()).unwrap();
            assert_eq!(a1, a2);
            assert_eq!(e1, e2);
        }
    }

    #[test]
    fn tmin_holds_option_for_minimum_dwell() {
        // Selection would hand control to option 1 every step; with
        // t_min = 16 the first selection sticks for 16 steps.
        let set = mock_set([false, false, false]);
        let mut exec = ExecState::reset(3);
        let mut holder = Vec::new();
        for _ in 0..20 {
            let _ = select_action_cascade_tmin(&set, &[0.0, 0.0], &mut exec, 16, true, &mut rng()).unwrap();
            holder.push(exec.active);
        }
        assert!(holder.iter().all(|&i| i == 1));
        assert_eq!(exec.dwell, 20);
    }

    #[test]
    fn tmin_dwell_resets_on_switch() {
        // Mock where re-selection flips the winner based on state sign.
        let set_a = mock_set([false, false, false]); // walks to option 1
        let mut exec = ExecState::reset(3);
        let _ = select_action_cascade_tmin(&set_a, &[0.0, 0.0], &mut exec, 3, true, &mut rng()).unwrap();
        assert_eq!((exec.active, exec.dwell), (1, 1));
        let _ = select_action_cascade_tmin(&set_a, &[0.0, 0.0], &mut exec, 3, true, &mut rng()).unwrap();
        assert_eq!((exec.active, exec.dwell), (1, 2));
        let _ = select_action_cascade_tmin(&set_a, &[0.0, 0.0], &mut exec, 3, true, &mut rng()).unwrap();
        assert_eq!((exec.active, exec.dwell), (1, 3));
        // Dwell expired; next selection re-runs the cascade. Same winner
        // here, so dwell keeps counting.
        let _ = select_action_cascade_tmin(&set_a, &[0.0, 0.0], &mut exec, 3, true, &mut rng()).unwrap();
        assert_eq!((exec.active, exec.dwell), (1, 4));
        // A genuine switch resets dwell to 1: fall back through a set whose
        // prefixes all terminate (winner is option 3).
        let set_b = mock_set([true, true, true]);
        exec.dwell = 3; // expired again
        let _ = select_action_cascade_tmin(&set_b, &[0.0, 0.0], &mut exec, 3, true, &mut rng()).unwrap();
        assert_eq!((exec.active, exec.dwell), (3, 1));
    }

    #[test]
    fn empty_set_is_usage_error() {
        let set = OptionSet::new(0.95);
        let mut exec = ExecState::reset(0);
        assert!(matches!(
            select_action_cascade(&set, &[0.0], &mut exec, true, &mut rng()),
            Err(SamoError::Usage(_))
        ));
    }
}
