//! Corridor map definitions and their on-disk text format.
//!
//! A map is an ordered list of straight segments walked from the first
//! spawn corner; each segment carries its length in cells (one cell = one
//! meter), the turn the corridor takes at its end, and an optional wall
//! color cueing that turn. The text format is line based:
//!
//! ```text
//! # comment
//! halfwidth 1.0
//! segment 15 left none
//! segment 130 right none
//! segment 15 none none
//! ```

use std::fmt;

use crate::error::SamoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Left,
    Right,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallColor {
    None,
    Green,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Length in cells (meters).
    pub length: f64,
    /// Turn taken at the end of this segment.
    pub turn: Turn,
    /// Cue color painted near the end of this segment.
    pub color: WallColor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorMap {
    pub half_width: f64,
    pub segments: Vec<Segment>,
}

impl CorridorMap {
    pub fn parse(text: &str) -> Result<Self, SamoError> {
        let mut half_width = None;
        let mut segments = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            match key {
                "halfwidth" => {
                    let v: f64 = parts
                        .next()
                        .ok_or_else(|| bad(lineno, "halfwidth needs a value"))?
                        .parse()
                        .map_err(|_| bad(lineno, "halfwidth must be a number"))?;
                    if v <= 0.0 {
                        return Err(bad(lineno, "halfwidth must be positive"));
                    }
                    half_width = Some(v);
                }
                "segment" => {
                    let length: f64 = parts
                        .next()
                        .ok_or_else(|| bad(lineno, "segment needs a length"))?
                        .parse()
                        .map_err(|_| bad(lineno, "segment length must be a number"))?;
                    if length <= 0.0 {
                        return Err(bad(lineno, "segment length must be positive"));
                    }
                    let turn = match parts.next().unwrap_or("none") {
                        "left" => Turn::Left,
                        "right" => Turn::Right,
                        "none" => Turn::None,
                        other => return Err(bad(lineno, &format!("unknown turn '{other}'"))),
                    };
                    let color = match parts.next().unwrap_or("none") {
                        "green" => WallColor::Green,
                        "red" => WallColor::Red,
                        "none" => WallColor::None,
                        other => return Err(bad(lineno, &format!("unknown color '{other}'"))),
                    };
                    segments.push(Segment { length, turn, color });
                }
                other => return Err(bad(lineno, &format!("unknown directive '{other}'"))),
            }
        }
        let half_width = half_width.ok_or_else(|| SamoError::Config("map is missing halfwidth".into()))?;
        if segments.is_empty() {
            return Err(SamoError::Config("map needs at least one segment".into()));
        }
        Ok(CorridorMap { half_width, segments })
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }
}

fn bad(lineno: usize, msg: &str) -> SamoError {
    SamoError::Config(format!("map line {}: {msg}", lineno + 1))
}

impl fmt::Display for CorridorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "halfwidth {}", self.half_width)?;
        for s in &self.segments {
            let turn = match s.turn {
                Turn::Left => "left",
                Turn::Right => "right",
                Turn::None => "none",
            };
            let color = match s.color {
                WallColor::None => "none",
                WallColor::Green => "green",
                WallColor::Red => "red",
            };
            writeln!(f, "segment {} {turn} {color}", s.length)?;
        }
        Ok(())
    }
}

/// Training map: two turns, straight runs sized so an always-straight
/// policy survives roughly 40 steps while the full corridor outlasts the
/// 400-step cap. The corridor is narrower than the full-lock turning
/// circle (1.35 m), so corners demand precisely timed steering and the
/// degenerate circle-in-place survival strategy does not fit.
pub const TRAIN_2TURN: &str = "\
# two-turn training corridor
halfwidth 0.6
segment 15 left none
segment 130 right none
segment 15 none none
";

/// Color-cued map: every junction is announced by painted wall blocks and
/// grows a dead-end stub in the wrong direction.
pub const COLOR_CUES: &str = "\
# color-cued corridor: green marks the correct turn, red the opposite
halfwidth 1.0
segment 14 left green
segment 30 right red
segment 30 left green
segment 30 right red
segment 14 none none
";
