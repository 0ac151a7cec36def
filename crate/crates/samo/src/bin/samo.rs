use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use samo::envs::make_env;
use samo::harness::{
    aggregate_curves, checkpoint, evaluate, metrics_path, parse_config, run_experiment, trace,
    RunArgs,
};

#[derive(Parser)]
#[command(name = "samo", about = "Sequential option learning for stay-alive control tasks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train (or resume) every configured seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint with the execution cascade.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Environment name: corridor, color_corridor, goal_corridor, two_zone.
        #[arg(long)]
        env: String,
        #[arg(long)]
        episodes: usize,
        /// Greedy action selection (means / argmax) instead of sampling.
        #[arg(long)]
        greedy: bool,
        /// Minimum option dwell; defaults to the value stored in the checkpoint.
        #[arg(long)]
        t_min: Option<u32>,
        /// Episode step cap; defaults per environment.
        #[arg(long)]
        max_steps: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Aggregate seed metrics into a mean/half-std curve CSV.
    Aggregate {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Bucket width in env steps.
        #[arg(long, default_value_t = 5000)]
        window: u64,
    },
    /// Export greedy trajectory traces for external visualization.
    Trace {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "corridor")]
        env: String,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn default_max_steps(env: &str) -> u32 {
    match env {
        "two_zone" | "goal_corridor" => 200,
        _ => 400,
    }
}

/// Rebuilds the environment for a checkpoint, inferring the frame count
/// from the stored observation width.
fn env_for_checkpoint(
    name: &str,
    obs_dim: usize,
    max_steps: u32,
) -> Result<Box<dyn samo::envs::Environment>, samo::SamoError> {
    let probe = make_env(name, 1, max_steps, 0)?;
    let frame = probe.obs_dim();
    if obs_dim % frame != 0 {
        return Err(samo::SamoError::Config(format!(
            "checkpoint expects {obs_dim}-dim observations but '{name}' frames are {frame}-dim"
        )));
    }
    make_env(name, obs_dim / frame, max_steps, 0)
}

fn run() -> Result<(), samo::SamoError> {
    match Cli::parse().command {
        Command::Train { config, seed, out } => {
            let config = parse_config(&config)?;
            let summary = run_experiment(&RunArgs {
                config,
                out_dir: out.clone(),
                seed_filter: seed,
                interrupt_after: None,
            })?;
            println!("run {}", summary.run_id);
            for s in &summary.seeds {
                let status = if s.skipped_complete {
                    "already complete"
                } else if s.resumed {
                    "resumed"
                } else {
                    "trained"
                };
                println!(
                    "seed {}: {status}, {} env steps, {} episodes, {} options -> {}",
                    s.seed,
                    s.env_steps,
                    s.episodes,
                    s.options,
                    metrics_path(&out, s.seed).display()
                );
            }
        }
        Command::Eval {
            checkpoint: ckpt,
            env,
            episodes,
            greedy,
            t_min,
            max_steps,
            seed,
        } => {
            let (set, meta) = checkpoint::load(&ckpt)?;
            let mut e = env_for_checkpoint(
                &env,
                meta.obs_dim,
                max_steps.unwrap_or_else(|| default_max_steps(&env)),
            )?;
            let report = evaluate(
                &set,
                e.as_mut(),
                episodes,
                greedy,
                t_min.unwrap_or(meta.t_min),
                seed,
            )?;
            println!("{}", report.summary());
        }
        Command::Aggregate { runs, out, window } => {
            let points = aggregate_curves(&runs, window, &out)?;
            println!("wrote {} curve points to {}", points.len(), out.display());
        }
        Command::Trace {
            checkpoint: ckpt,
            out,
            env,
            episodes,
            seed,
        } => {
            let (set, meta) = checkpoint::load(&ckpt)?;
            let mut e = env_for_checkpoint(&env, meta.obs_dim, default_max_steps(&env))?;
            trace(&set, e.as_mut(), episodes, meta.t_min, seed, &out)?;
            println!("wrote traces to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
