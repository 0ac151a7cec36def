//! Experiment runner: per-seed training runs with streaming metrics,
//! checkpoints at every option freeze, and crash-safe resume.
//!
//! Resume anchors on the last `bce_done` marker row: everything after it
//! is discarded (the interrupted phase re-runs from its start), the option
//! set reloads from the checkpoint written with that marker, and the
//! counters restore from the marker row. Because every phase draws from
//! its own per-option RNG streams, a resumed run reproduces the
//! uninterrupted run byte for byte.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::envs::make_env;
use crate::error::SamoError;
use crate::options::OptionSet;
use crate::trainer::{train_all, Counters, RunEvent};

use super::checkpoint::{self, CheckpointMeta};
use super::config::RunConfig;
use super::metrics::{read_metrics, CsvSink, MetricsRow};
use crate::termination::DEFAULT_THRESHOLD;

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    /// Run only this seed when set.
    pub seed_filter: Option<u64>,
    /// Test hook: simulate a crash after this many env steps per seed.
    pub interrupt_after: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct SeedSummary {
    pub seed: u64,
    pub env_steps: u64,
    pub episodes: u64,
    pub options: usize,
    pub resumed: bool,
    pub skipped_complete: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_id: String,
    pub seeds: Vec<SeedSummary>,
}

/// Deterministic run identity derived from the configuration.
pub fn run_id(config: &RunConfig) -> String {
    let shaping = if config.samo.shaping { "" } else { "-noshape" };
    format!("{}-{}opt{shaping}", config.env.name, config.samo.max_options)
}

pub fn metrics_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("seed_{seed}.csv"))
}

pub fn checkpoint_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("seed_{seed}.ckpt"))
}

/// Executes the configured run: every seed trains (or resumes), writing
/// `seed_<s>.csv` metrics and `seed_<s>.ckpt` checkpoints plus one
/// `manifest.toml` for the whole run.
pub fn run_experiment(args: &RunArgs) -> Result<RunSummary, SamoError> {
    args.config.validate()?;
    std::fs::create_dir_all(&args.out_dir)?;
    let id = run_id(&args.config);

    let manifest_path = args.out_dir.join("manifest.toml");
    let manifest = format!(
        "run_id = \"{id}\"\n\n# configuration echo\n{}",
        args.config.to_toml()
    );
    if manifest_path.exists() {
        let existing = std::fs::read_to_string(&manifest_path)?;
        if existing != manifest {
            return Err(SamoError::Config(format!(
                "output dir {} belongs to a different run configuration",
                args.out_dir.display()
            )));
        }
    } else {
        std::fs::write(&manifest_path, &manifest)?;
    }

    let seeds: Vec<u64> = args
        .config
        .run
        .seeds
        .iter()
        .copied()
        .filter(|s| args.seed_filter.map_or(true, |f| f == *s))
        .collect();
    if seeds.is_empty() {
        return Err(SamoError::Config("seed filter matches no configured seed".into()));
    }

    let summaries: Result<Vec<SeedSummary>, SamoError> = seeds
        .par_iter()
        .map(|&seed| run_seed(args, &id, seed))
        .collect();
    Ok(RunSummary {
        run_id: id,
        seeds: summaries?,
    })
}

/// Rows to keep when resuming: everything up to and including the last
/// `bce_done` marker. Returns the kept rows and whether the file already
/// reflects a completed run.
fn resume_point(rows: &[MetricsRow], total_steps: u64) -> (Vec<MetricsRow>, bool) {
    if let Some(last) = rows.last() {
        if last.record.env_step >= total_steps {
            return (rows.to_vec(), true);
        }
    }
    let anchor = rows
        .iter()
        .rposition(|r| r.record.event == RunEvent::BceDone);
    match anchor {
        Some(i) => (rows[..=i].to_vec(), false),
        None => (Vec::new(), false),
    }
}

fn run_seed(args: &RunArgs, id: &str, seed: u64) -> Result<SeedSummary, SamoError> {
    let cfg = &args.config;
    let settings = cfg.train_settings();
    let metrics = metrics_path(&args.out_dir, seed);
    let ckpt = checkpoint_path(&args.out_dir, seed);

    let mut counters = Counters {
        hard_stop: args.interrupt_after,
        ..Counters::default()
    };
    let mut set = OptionSet::new(settings.gamma_beta);
    let mut resumed = false;

    let mut sink = if metrics.exists() {
        let rows = read_metrics(&metrics)?;
        let (kept, complete) = resume_point(&rows, settings.total_steps);
        if complete {
            let last = rows.last().expect("non-empty complete metrics");
            return Ok(SeedSummary {
                seed,
                env_steps: last.record.env_step,
                episodes: last.record.episode,
                options: last.record.option_count,
                resumed: false,
                skipped_complete: true,
            });
        }
        if let Some(anchor) = kept.last() {
            let (restored, _meta) = checkpoint::load(&ckpt)?;
            let finished = kept
                .iter()
                .filter(|r| r.record.event == RunEvent::BceDone)
                .count();
            if restored.len() != finished {
                return Err(SamoError::Format(format!(
                    "checkpoint holds {} options but metrics record {finished} completed",
                    restored.len()
                )));
            }
            counters.env_steps = anchor.record.env_step;
            counters.episodes = anchor.record.episode;
            set = restored;
            resumed = true;
        }
        CsvSink::create_with_rows(&metrics, id, seed, &kept)?
    } else {
        CsvSink::create(&metrics, id, seed)?
    };

    let mut env = make_env(&cfg.env.name, cfg.env.k_frames, cfg.env.max_steps, seed)?;
    let meta = CheckpointMeta {
        space: env.action_space(),
        obs_dim: env.obs_dim(),
        t_min: cfg.samo.t_min,
        gamma_beta: cfg.samo.gamma_beta,
        threshold: DEFAULT_THRESHOLD,
    };
    let ckpt_for_hook = ckpt.clone();
    let mut hook = move |s: &OptionSet| checkpoint::save(&ckpt_for_hook, s, &meta);

    let set = train_all(
        env.as_mut(),
        &settings,
        seed,
        set,
        &mut counters,
        &mut sink,
        &mut hook,
    )?;

    Ok(SeedSummary {
        seed,
        env_steps: counters.env_steps,
        episodes: counters.episodes,
        options: set.len(),
        resumed,
        skipped_complete: false,
    })
}
