//! Scripted operator input: JSON lines of `{"t", "jx", "jy", "trigger"}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::Joystick;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    pub t: f64,
    pub jx: f64,
    pub jy: f64,
    pub trigger: bool,
}

impl TraceEvent {
    pub fn new(t: f64, j: Joystick) -> Self {
        Self {
            t,
            jx: j.jx,
            jy: j.jy,
            trigger: j.trigger,
        }
    }

    pub fn joystick(&self) -> Joystick {
        Joystick::new(self.jx, self.jy, self.trigger)
    }
}

/// Input events with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InputTrace {
    events: Vec<TraceEvent>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: timestamp {t} is not after the previous event ({prev})")]
    NotIncreasing { line: usize, t: f64, prev: f64 },
    #[error("line {line}: timestamp must be finite and ≥ 0, got {t}")]
    BadTime { line: usize, t: f64 },
}

impl InputTrace {
    pub fn new(events: Vec<TraceEvent>) -> Result<Self, TraceError> {
        let mut prev = f64::NEG_INFINITY;
        for (i, e) in events.iter().enumerate() {
            let line = i + 1;
            if !(e.t.is_finite() && e.t >= 0.0) {
                return Err(TraceError::BadTime { line, t: e.t });
            }
            if e.t <= prev {
                return Err(TraceError::NotIncreasing { line, t: e.t, prev });
            }
            prev = e.t;
        }
        Ok(Self { events })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Parses JSON lines; blank lines are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        let mut events = Vec::new();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let e: TraceEvent =
                serde_json::from_str(raw).map_err(|source| TraceError::Parse { line: i + 1, source })?;
            events.push(e);
            lines.push(i + 1);
        }
        Self::new(events).map_err(|e| match e {
            TraceError::NotIncreasing { line, t, prev } => TraceError::NotIncreasing {
                line: lines[line - 1],
                t,
                prev,
            },
            TraceError::BadTime { line, t } => TraceError::BadTime {
                line: lines[line - 1],
                t,
            },
            other => other,
        })
    }

    pub fn to_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }
}
