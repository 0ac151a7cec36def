//! Metrics rows and their CSV encoding. One row per episode (plus freeze
//! and BCE marker rows), flushed immediately so curves survive crashes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::SamoError;
use crate::trainer::{EpisodeRecord, MetricsSink, RunEvent};

pub const CSV_HEADER: &str =
    "run_id,seed,env_step,episode,episode_len,undiscounted_return,alpha,option_histogram,option_count,event";

/// A parsed metrics row: the episode record plus run identity.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub record: EpisodeRecord,
}

fn event_str(e: RunEvent) -> &'static str {
    match e {
        RunEvent::None => "none",
        RunEvent::OptionFrozen { mature: true } => "option_frozen",
        RunEvent::OptionFrozen { mature: false } => "option_frozen_immature",
        RunEvent::BceDone => "bce_done",
    }
}

fn parse_event(s: &str) -> Result<RunEvent, SamoError> {
    match s {
        "none" => Ok(RunEvent::None),
        "option_frozen" => Ok(RunEvent::OptionFrozen { mature: true }),
        "option_frozen_immature" => Ok(RunEvent::OptionFrozen { mature: false }),
        "bce_done" => Ok(RunEvent::BceDone),
        other => Err(SamoError::Format(format!("unknown event '{other}'"))),
    }
}

fn histogram_str(hist: &[(usize, u32)]) -> String {
    if hist.is_empty() {
        return "-".to_string();
    }
    hist.iter()
        .map(|(i, c)| format!("{i}:{c}"))
        .collect::<Vec<_>>()
        .join("|")
}

fn parse_histogram(s: &str) -> Result<Vec<(usize, u32)>, SamoError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split('|')
        .map(|pair| {
            let (i, c) = pair
                .split_once(':')
                .ok_or_else(|| SamoError::Format(format!("bad histogram entry '{pair}'")))?;
            Ok((
                i.parse().map_err(|_| SamoError::Format(format!("bad histogram index '{i}'")))?,
                c.parse().map_err(|_| SamoError::Format(format!("bad histogram count '{c}'")))?,
            ))
        })
        .collect()
}

impl MetricsRow {
    pub fn to_line(&self) -> String {
        let r = &self.record;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.seed,
            r.env_step,
            r.episode,
            r.length,
            r.undiscounted_return,
            r.alpha,
            histogram_str(&r.histogram),
            r.option_count,
            event_str(r.event)
        )
    }

    pub fn parse_line(line: &str) -> Result<Self, SamoError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(SamoError::Format(format!(
                "expected 10 fields, got {}: '{line}'",
                fields.len()
            )));
        }
        let num = |i: usize, what: &str| -> Result<f64, SamoError> {
            fields[i]
                .parse()
                .map_err(|_| SamoError::Format(format!("bad {what} '{}'", fields[i])))
        };
        Ok(MetricsRow {
            run_id: fields[0].to_string(),
            seed: num(1, "seed")? as u64,
            record: EpisodeRecord {
                env_step: num(2, "env_step")? as u64,
                episode: num(3, "episode")? as u64,
                length: num(4, "episode_len")? as u32,
                undiscounted_return: num(5, "return")?,
                alpha: num(6, "alpha")?,
                histogram: parse_histogram(fields[7])?,
                option_count: num(8, "option_count")? as usize,
                event: parse_event(fields[9])?,
            },
        })
    }
}

/// Streaming CSV writer implementing the trainer's sink.
pub struct CsvSink {
    run_id: String,
    seed: u64,
    out: BufWriter<File>,
}

impl CsvSink {
    /// Creates (or truncates) the file and writes the header.
    pub fn create(path: &Path, run_id: &str, seed: u64) -> Result<Self, SamoError> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{CSV_HEADER}")?;
        out.flush()?;
        Ok(CsvSink {
            run_id: run_id.to_string(),
            seed,
            out,
        })
    }

    /// Recreates the file with the given already-parsed rows (used by
    /// resume to truncate at the last consistent point).
    pub fn create_with_rows(path: &Path, run_id: &str, seed: u64, rows: &[MetricsRow]) -> Result<Self, SamoError> {
        let mut sink = Self::create(path, run_id, seed)?;
        for row in rows {
            writeln!(sink.out, "{}", row.to_line())?;
        }
        sink.out.flush()?;
        Ok(sink)
    }
}

impl MetricsSink for CsvSink {
    fn record(&mut self, rec: &EpisodeRecord) -> Result<(), SamoError> {
        let row = MetricsRow {
            run_id: self.run_id.clone(),
            seed: self.seed,
            record: rec.clone(),
        };
        writeln!(self.out, "{}", row.to_line())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a metrics file back into rows, checking the header.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, SamoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != CSV_HEADER {
                return Err(SamoError::Format(format!("unexpected header '{line}'")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        rows.push(MetricsRow::parse_line(&line)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_round_trips_through_csv() {
        let row = MetricsRow {
            run_id: "corridor-3opt".into(),
            seed: 4,
            record: EpisodeRecord {
                env_step: 12345,
                episode: 77,
                length: 212,
                undiscounted_return: -1.0,
                alpha: 0.08744573,
                histogram: vec![(1, 180), (3, 32)],
                option_count: 3,
                event: RunEvent::OptionFrozen { mature: false },
            },
        };
        let back = MetricsRow::parse_line(&row.to_line()).unwrap();
        assert_eq!(row, back);
    }

    #[test]
    fn file_round_trip_and_header_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rec = EpisodeRecord {
            env_step: 10,
            episode: 1,
            length: 10,
            undiscounted_return: 0.0,
            alpha: 1.0,
            histogram: vec![(1, 10)],
            option_count: 0,
            event: RunEvent::None,
        };
        {
            let mut sink = CsvSink::create(&path, "test", 0).unwrap();
            sink.record(&rec).unwrap();
        }
        let rows = read_metrics(&path).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].record, rec);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(CSV_HEADER));
    }
}
