//! Curve aggregation across seeds: buckets episode rows by env step and
//! emits the cross-seed mean episode length with a half-standard-deviation
//! band.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::SamoError;
use crate::trainer::RunEvent;

use super::metrics::{read_metrics, MetricsRow};

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub env_step: u64,
    pub mean_episode_len: f64,
    pub half_std: f64,
    pub seeds: usize,
}

/// Aggregates rows into `window`-sized buckets. Per bucket and seed the
/// episode lengths are averaged; across seeds the mean and half the sample
/// standard deviation form the curve. Marker rows (freeze/BCE) duplicate
/// episode stats and are skipped. Buckets with no episodes are omitted.
pub fn aggregate_rows(rows: &[MetricsRow], window: u64) -> Vec<CurvePoint> {
    assert!(window >= 1);
    // bucket -> seed -> (sum, count)
    let mut buckets: BTreeMap<u64, BTreeMap<u64, (f64, u64)>> = BTreeMap::new();
    for row in rows {
        if row.record.event != RunEvent::None {
            continue;
        }
        let bucket = row.record.env_step / window;
        let per_seed = buckets.entry(bucket).or_default();
        let entry = per_seed.entry(row.seed).or_insert((0.0, 0));
        entry.0 += row.record.length as f64;
        entry.1 += 1;
    }
    buckets
        .into_iter()
        .map(|(bucket, per_seed)| {
            let means: Vec<f64> = per_seed.values().map(|(s, c)| s / *c as f64).collect();
            let n = means.len();
            let mean = means.iter().sum::<f64>() / n as f64;
            let half_std = if n >= 2 {
                let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1) as f64;
                var.sqrt() / 2.0
            } else {
                0.0
            };
            CurvePoint {
                env_step: bucket * window,
                mean_episode_len: mean,
                half_std,
                seeds: n,
            }
        })
        .collect()
}

/// Reads every `seed_*.csv` under `run_dir`, aggregates, and writes the
/// curve CSV.
pub fn aggregate_curves(run_dir: &Path, window: u64, out: &Path) -> Result<Vec<CurvePoint>, SamoError> {
    let mut rows = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(run_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("seed_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(SamoError::Config(format!(
            "no seed_*.csv metrics files under {}",
            run_dir.display()
        )));
    }
    for f in files {
        rows.extend(read_metrics(&f)?);
    }
    let points = aggregate_rows(&rows, window);
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "env_step,mean_episode_len,half_std,seeds")?;
    for p in &points {
        writeln!(w, "{},{},{},{}", p.env_step, p.mean_episode_len, p.half_std, p.seeds)?;
    }
    w.flush()?;
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::EpisodeRecord;

    fn row(seed: u64, env_step: u64, len: u32, event: RunEvent) -> MetricsRow {
        MetricsRow {
            run_id: "t".into(),
            seed,
            record: EpisodeRecord {
                env_step,
                episode: 1,
                length: len,
                undiscounted_return: 0.0,
                alpha: 1.0,
                histogram: vec![(1, len)],
                option_count: 1,
                event,
            },
        }
    }

    #[test]
    fn single_seed_band_is_zero() {
        let rows = vec![row(0, 100, 10, RunEvent::None), row(0, 200, 20, RunEvent::None)];
        let pts = aggregate_rows(&rows, 1000);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].mean_episode_len, 15.0);
        assert_eq!(pts[0].half_std, 0.0);
        assert_eq!(pts[0].seeds, 1);
    }

    #[test]
    fn two_seeds_half_std_matches_scalar_oracle() {
        let rows = vec![row(0, 100, 10, RunEvent::None), row(1, 150, 20, RunEvent::None)];
        let pts = aggregate_rows(&rows, 1000);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].mean_episode_len, 15.0);
        // Sample std of {10, 20} is sqrt(50); half of it:
        let want = 50.0f64.sqrt() / 2.0;
        assert!((pts[0].half_std - want).abs() < 1e-12);
        assert!((pts[0].half_std - 3.5355339059327378).abs() < 1e-12);
    }

    #[test]
    fn empty_buckets_are_omitted_and_events_skipped() {
        let rows = vec![
            row(0, 100, 10, RunEvent::None),
            row(0, 5100, 30, RunEvent::BceDone),
            row(0, 9100, 50, RunEvent::None),
        ];
        let pts = aggregate_rows(&rows, 1000);
        let steps: Vec<u64> = pts.iter().map(|p| p.env_step).collect();
        assert_eq!(steps, vec![0, 9000]);
    }
}
