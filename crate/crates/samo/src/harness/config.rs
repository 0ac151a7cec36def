//! Run configuration: TOML with a fixed key set, strict parsing and range
//! validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SamoError;
use crate::sac::SacHyper;
use crate::trainer::TrainSettings;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub name: String,
    pub max_steps: u32,
    pub k_frames: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SacConfig {
    pub lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch: usize,
    pub buffer: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamoConfig {
    pub alpha_min: f64,
    pub gamma_beta: f64,
    pub max_options: usize,
    pub t_min: u32,
    pub shaping: bool,
    pub step_budget: u64,
    /// BCE-retrain the first prefix function; off reproduces the plain
    /// navigation setting (TD-only prefix 1).
    #[serde(default = "default_true")]
    pub bce_prefix1: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seeds: Vec<u64>,
    pub total_steps: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub sac: SacConfig,
    pub samo: SamoConfig,
    pub run: RunSection,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), SamoError> {
        let err = |key: &str, msg: &str| Err(SamoError::Config(format!("{key}: {msg}")));
        if self.env.max_steps == 0 {
            return err("env.max_steps", "must be at least 1");
        }
        if self.env.k_frames == 0 {
            return err("env.k_frames", "must be at least 1");
        }
        if !(self.sac.lr > 0.0) {
            return err("sac.lr", "must be positive");
        }
        if !(self.sac.gamma > 0.0 && self.sac.gamma <= 1.0) {
            return err("sac.gamma", "must lie in (0, 1]");
        }
        if !(self.sac.tau > 0.0 && self.sac.tau <= 1.0) {
            return err("sac.tau", "must lie in (0, 1]");
        }
        if self.sac.batch == 0 {
            return err("sac.batch", "must be at least 1");
        }
        if self.sac.buffer < self.sac.batch {
            return err("sac.buffer", "must hold at least one batch");
        }
        if !(self.samo.alpha_min > 0.0 && self.samo.alpha_min < 1.0) {
            return err("samo.alpha_min", "must lie in (0, 1)");
        }
        if !(self.samo.gamma_beta > 0.0 && self.samo.gamma_beta <= 1.0) {
            return err("samo.gamma_beta", "must lie in (0, 1]");
        }
        if self.samo.max_options == 0 {
            return err("samo.max_options", "must be at least 1");
        }
        if self.samo.t_min == 0 {
            return err("samo.t_min", "must be at least 1");
        }
        if self.samo.step_budget == 0 {
            return err("samo.step_budget", "must be at least 1");
        }
        if self.run.seeds.is_empty() {
            return err("run.seeds", "need at least one seed");
        }
        if self.run.total_steps == 0 {
            return err("run.total_steps", "must be at least 1");
        }
        Ok(())
    }

    pub fn train_settings(&self) -> TrainSettings {
        TrainSettings {
            sac: SacHyper {
                lr: self.sac.lr,
                gamma: self.sac.gamma,
                tau: self.sac.tau,
                batch: self.sac.batch,
            },
            buffer: self.sac.buffer,
            alpha_min: self.samo.alpha_min,
            gamma_beta: self.samo.gamma_beta,
            max_options: self.samo.max_options,
            t_min: self.samo.t_min,
            shaping: self.samo.shaping,
            step_budget: self.samo.step_budget,
            total_steps: self.run.total_steps,
            bce_prefix1: self.samo.bce_prefix1,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses and validates a config file. Unknown keys are rejected; missing
/// keys and range violations name the offending key.
pub fn parse_config(path: &Path) -> Result<RunConfig, SamoError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, SamoError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| SamoError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
