//! WebSocket message schema. Every frame is one JSON object carrying
//! `"v": 1` and a `"type"` tag.
//!
//! Inbound (client to server):
//!
//! ```json
//! {"v":1,"type":"input","t":3.25,"jx":0.4,"jy":0.0,"trigger":true}
//! {"v":1,"type":"command","command":"start"}
//! {"v":1,"type":"command","command":"set_mode","mode":"cs"}
//! ```
//!
//! Outbound: `hello`, `state`, `costmap`, `metrics`, `error`.

use serde::{Deserialize, Serialize};
use sharenav_core::costmap::{Costmap, CostmapHeader};
use sharenav_core::scenario::{Outcome, Snapshot, Summary, WorldModel};
use sharenav_core::{ControlMode, Joystick, Vec2};
use thiserror::Error;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Start,
    Reset,
    SetMode,
    /// Ask for one `costmap` frame of the current composed costmap.
    Costmap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inbound {
    Input {
        /// Session time the input was produced at; absent means "now".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<f64>,
        jx: f64,
        jy: f64,
        trigger: bool,
        #[serde(default)]
        mode_button: bool,
    },
    Command {
        command: CommandKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<ControlMode>,
    },
}

impl Inbound {
    pub fn input(t: Option<f64>, j: Joystick) -> Self {
        Inbound::Input {
            t,
            jx: j.jx,
            jy: j.jy,
            trigger: j.trigger,
            mode_button: j.mode_button,
        }
    }

    pub fn command(command: CommandKind) -> Self {
        Inbound::Command { command, mode: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Driver,
    Observer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirePose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireControl {
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireFilter {
    pub d: f64,
    pub w: f64,
    pub l: f64,
    pub s: u8,
    pub p: f64,
    pub origin: Vec2,
    pub x_axis: Vec2,
    pub y_axis: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    /// Broadcast counter, increasing across resets.
    pub seq: u64,
    pub tick: u64,
    pub t: f64,
    pub mode: ControlMode,
    pub pose: WirePose,
    pub u: WireControl,
    /// Joystick state as applied (after the delay line).
    pub joy: Joystick,
    pub path: Vec<Vec2>,
    pub filter: Option<WireFilter>,
    pub sensed: Vec<String>,
    pub radiation: f64,
    pub cum_radiation: f64,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

impl StateFrame {
    pub fn from_snapshot(seq: u64, mode: ControlMode, s: &Snapshot) -> Self {
        let r = &s.row;
        Self {
            seq,
            tick: r.tick,
            t: r.t,
            mode,
            pose: WirePose {
                x: r.x,
                y: r.y,
                theta: r.theta,
            },
            u: WireControl {
                v: r.v,
                omega: r.omega,
            },
            joy: Joystick {
                jx: r.jx,
                jy: r.jy,
                trigger: r.trigger,
                mode_button: false,
            },
            path: s.path.clone(),
            filter: s.filter.map(|f| WireFilter {
                d: f.d,
                w: f.params.w,
                l: f.params.l,
                s: f.params.s,
                p: f.params.p,
                origin: f.frame.origin,
                x_axis: f.frame.x_axis,
                y_axis: f.frame.y_axis,
            }),
            sensed: s.sensed.clone(),
            radiation: r.radiation,
            cum_radiation: s.cum_radiation,
            done: s.outcome.is_some(),
            outcome: s.outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Hello {
        role: Role,
        mode: ControlMode,
        dt: f64,
        latency: f64,
        rate: f64,
        started: bool,
        world: Box<WorldModel>,
    },
    State(Box<StateFrame>),
    Costmap {
        tick: u64,
        header: CostmapHeader,
        /// Row-major, `y = 0` first.
        cells: Vec<u8>,
    },
    Metrics {
        summary: Summary,
    },
    Error {
        message: String,
    },
}

impl Outbound {
    pub fn costmap(tick: u64, cm: &Costmap) -> Self {
        Outbound::Costmap {
            tick,
            header: cm.header(),
            cells: cm.cells().to_vec(),
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Outbound::Error {
            message: message.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    body: T,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed message: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported protocol version {0} (expected {PROTOCOL_VERSION})")]
    Version(u32),
}

fn encode<T: Serialize>(body: &T) -> String {
    serde_json::to_string(&Envelope {
        v: PROTOCOL_VERSION,
        body,
    })
    .expect("wire messages serialize")
}

fn decode<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, WireError> {
    #[derive(Deserialize)]
    struct Version {
        v: u32,
    }
    let Version { v } = serde_json::from_str(text)?;
    if v != PROTOCOL_VERSION {
        return Err(WireError::Version(v));
    }
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("v");
    }
    Ok(serde_json::from_value(value)?)
}

impl Inbound {
    pub fn encode(&self) -> String {
        encode(self)
    }

    pub fn decode(text: &str) -> Result<Self, WireError> {
        decode(text)
    }
}

impl Outbound {
    pub fn encode(&self) -> String {
        encode(self)
    }

    pub fn decode(text: &str) -> Result<Self, WireError> {
        decode(text)
    }
}
