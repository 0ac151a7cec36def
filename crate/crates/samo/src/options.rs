//! Ordered option sets: frozen policies, one termination function per
//! prefix, and the eligibility predicate that chains them.

use crate::error::SamoError;
use crate::policy::{Action, PolicyHead};
use crate::termination::TerminationFn;

/// A trained, frozen option: its policy head and the temperature at freeze
/// time. Frozen options are never updated again.
#[derive(Debug, Clone)]
pub struct FrozenOption {
    pub head: PolicyHead,
    pub alpha: f64,
    /// False when the option froze on step budget rather than maturity.
    pub mature: bool,
}

/// Ordered options plus one nested termination function per prefix.
#[derive(Debug)]
pub struct OptionSet {
    options: Vec<FrozenOption>,
    terminations: Vec<TerminationFn>,
    pub gamma_beta: f64,
}

impl OptionSet {
    pub fn new(gamma_beta: f64) -> Self {
        OptionSet {
            options: Vec::new(),
            terminations: Vec::new(),
            gamma_beta,
        }
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn option(&self, i: usize) -> &FrozenOption {
        &self.options[i - 1]
    }

    pub fn options(&self) -> &[FrozenOption] {
        &self.options
    }

    /// Termination function of the prefix `{omega_1 .. omega_i}` (1-based).
    pub fn termination(&self, i: usize) -> &TerminationFn {
        &self.terminations[i - 1]
    }

    pub fn terminations(&self) -> &[TerminationFn] {
        &self.terminations
    }

    pub fn last_termination_mut(&mut self) -> &mut TerminationFn {
        self.terminations.last_mut().expect("non-empty option set")
    }

    /// Appends a frozen option with its prefix termination function.
    pub fn push(&mut self, option: FrozenOption, termination: TerminationFn) {
        assert_eq!(termination.prefix_len, self.options.len() + 1);
        self.options.push(option);
        self.terminations.push(termination);
    }

    /// Hard classification of the prefix `{omega_1 .. omega_i}`.
    pub fn classify_prefix(&self, i: usize, state: &[f64], action: &Action) -> Result<bool, SamoError> {
        if i < 1 || i > self.terminations.len() {
            return Err(SamoError::Config(format!(
                "prefix index {i} out of range 1..={}",
                self.terminations.len()
            )));
        }
        self.terminations[i - 1].classify(state, action)
    }

    /// Eligibility of option `i` for `action_i` proposed by its policy:
    /// the prefix excluding it must classify termination (cannot handle the
    /// state) while the prefix including it classifies non-termination.
    /// Option 1's "previous prefix" is always-termination by convention,
    /// and the last option is additionally eligible whenever every prefix
    /// classifies termination (the cascade's fallback).
    pub fn eligible(&self, i: usize, state: &[f64], action_i: &Action) -> Result<bool, SamoError> {
        let k = self.options.len();
        if i < 1 || i > k {
            return Err(SamoError::Config(format!(
                "option index {i} out of range 1..={k}"
            )));
        }
        let prev_terminates = if i == 1 {
            true
        } else {
            self.classify_prefix(i - 1, state, action_i)?
        };
        let own_terminates = self.classify_prefix(i, state, action_i)?;
        if prev_terminates && !own_terminates {
            return Ok(true);
        }
        if i == k {
            // Fallback: every prefix classifies termination.
            for j in 1..=k {
                if !self.classify_prefix(j, state, action_i)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        Ok(false)
    }
}
