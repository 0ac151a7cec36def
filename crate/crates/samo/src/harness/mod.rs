//! Experiment harness: configuration, metrics, checkpoints, the seeded
//! runner with resume, curve aggregation and checkpoint evaluation.

pub mod aggregate;
pub mod checkpoint;
pub mod config;
pub mod evaluate;
pub mod metrics;
pub mod runner;

pub use aggregate::{aggregate_curves, aggregate_rows, CurvePoint};
pub use checkpoint::CheckpointMeta;
pub use config::{parse_config, parse_config_str, RunConfig};
pub use evaluate::{evaluate, trace, EvalReport};
pub use metrics::{read_metrics, CsvSink, MetricsRow, CSV_HEADER};
pub use runner::{checkpoint_path, metrics_path, run_experiment, run_id, RunArgs, RunSummary, SeedSummary};
