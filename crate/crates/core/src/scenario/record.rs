//! Run records: one JSON line per tick, then a summary line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::ControlMode;
use crate::costmap::ActiveFilter;
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Goal,
    Timeout,
}

/// Active filter as logged: offset, shape and placed frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterRow {
    pub d: f64,
    pub w: f64,
    pub l: f64,
    pub s: u8,
    pub p: f64,
    pub origin: Vec2,
    pub axis: Vec2,
}

impl From<&ActiveFilter> for FilterRow {
    fn from(f: &ActiveFilter) -> Self {
        Self {
            d: f.d,
            w: f.params.w,
            l: f.params.l,
            s: f.params.s,
            p: f.params.p,
            origin: f.frame.origin,
            axis: f.frame.y_axis,
        }
    }
}

/// State at tick time `t` and the command applied over `[t, t + dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRow {
    pub tick: u64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
    /// Joystick state after the delay line.
    pub jx: f64,
    pub jy: f64,
    pub trigger: bool,
    pub mode: ControlMode,
    pub filter: Option<FilterRow>,
    pub radiation: f64,
    /// Footprint clearance to the nearest true obstacle; `None` without obstacles.
    pub clearance: Option<f64>,
    pub replanned: bool,
    pub has_path: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub outcome: Outcome,
    pub mode: ControlMode,
    pub dt: f64,
    pub ticks: u64,
    /// Time of the terminal row (s).
    pub completion_time: f64,
    /// Left Riemann sum of per-tick radiation (intensity·s).
    pub cumulative_radiation: f64,
    pub min_clearance: Option<f64>,
    pub replans: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RecordLine {
    Tick(TickRow),
    Summary(Summary),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<TickRow>,
    pub summary: Summary,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record has no summary line")]
    MissingSummary,
    #[error("line {0}: rows after the summary line")]
    TrailingRows(usize),
}

/// `dt · Σ radiation` over every row but the terminal one.
pub fn cumulative_radiation(rows: &[TickRow], dt: f64) -> f64 {
    match rows.split_last() {
        Some((_, head)) => dt * head.iter().map(|r| r.radiation).sum::<f64>(),
        None => 0.0,
    }
}

/// Summary metrics derived from rows alone.
pub fn summarize(rows: &[TickRow], dt: f64, mode: ControlMode, outcome: Outcome) -> Summary {
    let last = rows.last();
    Summary {
        outcome,
        mode,
        dt,
        ticks: last.map_or(0, |r| r.tick),
        completion_time: last.map_or(0.0, |r| r.t),
        cumulative_radiation: cumulative_radiation(rows, dt),
        min_clearance: rows
            .iter()
            .filter_map(|r| r.clearance)
            .min_by(f64::total_cmp),
        replans: rows.iter().filter(|r| r.replanned).count() as u64,
    }
}

impl RunRecord {
    pub fn from_rows(rows: Vec<TickRow>, dt: f64, mode: ControlMode, outcome: Outcome) -> Self {
        let summary = summarize(&rows, dt, mode, outcome);
        Self { rows, summary }
    }

    pub fn reached_goal(&self) -> bool {
        self.summary.outcome == Outcome::Goal
    }

    pub fn recomputed_summary(&self) -> Summary {
        summarize(&self.rows, self.summary.dt, self.summary.mode, self.summary.outcome)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(&RecordLine::Tick(r.clone())).expect("row serializes"));
            out.push('\n');
        }
        out.push_str(
            &serde_json::to_string(&RecordLine::Summary(self.summary.clone())).expect("summary serializes"),
        );
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, RecordError> {
        let mut rows = Vec::new();
        let mut summary = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: RecordLine =
                serde_json::from_str(line).map_err(|source| RecordError::Parse { line: i + 1, source })?;
            match parsed {
                RecordLine::Tick(_) if summary.is_some() => return Err(RecordError::TrailingRows(i + 1)),
                RecordLine::Tick(r) => rows.push(r),
                RecordLine::Summary(s) => summary = Some(s),
            }
        }
        Ok(Self {
            rows,
            summary: summary.ok_or(RecordError::MissingSummary)?,
        })
    }
}
