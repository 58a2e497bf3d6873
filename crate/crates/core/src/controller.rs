//! Joystick mappings, path tracking and the two arbitration schemes.
//!
//! In shared control the robot always executes the tracker's command; the
//! operator only caps its speed and places cost valleys. In control
//! switching, holding the trigger hands the wheels to the joystick.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::planner::{closest_point, GlobalPath};
use crate::sim::{ControlInput, RobotState, VelocityLimits};

/// Operator device state. Axes are clamped to [−1, 1] on construction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Joystick {
    /// Horizontal stick position.
    pub jx: f64,
    /// Speed lever position, 0 at the detent.
    pub jy: f64,
    pub trigger: bool,
    #[serde(default)]
    pub mode_button: bool,
}

impl Joystick {
    pub const NEUTRAL: Joystick = Joystick {
        jx: 0.0,
        jy: 0.0,
        trigger: false,
        mode_button: false,
    };

    pub fn new(jx: f64, jy: f64, trigger: bool) -> Self {
        Self {
            jx: clamp_axis(jx),
            jy: clamp_axis(jy),
            trigger,
            mode_button: false,
        }
    }

    /// Re-applies the axis clamp, e.g. after deserialization.
    pub fn sanitized(self) -> Self {
        Self {
            jx: clamp_axis(self.jx),
            jy: clamp_axis(self.jy),
            ..self
        }
    }
}

fn clamp_axis(a: f64) -> f64 {
    if a.is_nan() {
        0.0
    } else {
        a.clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControlMode {
    #[serde(rename = "sc")]
    SharedControl,
    #[serde(rename = "cs")]
    ControlSwitching,
}

impl ControlMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::SharedControl => "sc",
            ControlMode::ControlSwitching => "cs",
        }
    }
}

impl std::str::FromStr for ControlMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" | "shared" | "shared_control" => Ok(ControlMode::SharedControl),
            "cs" | "switching" | "control_switching" => Ok(ControlMode::ControlSwitching),
            other => Err(format!("unknown control mode `{other}` (expected sc or cs)")),
        }
    }
}

impl std::fmt::Display for ControlMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControlMode::SharedControl => "sc",
            ControlMode::ControlSwitching => "cs",
        })
    }
}

/// How the stick and lever combine into a turn rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMapping {
    /// `ω = jx` above the detent, `jx · (1 + 0.8·jy)` below it.
    #[default]
    Multiplicative,
    /// `ω = jx` above the detent, `jx + 0.8·jy` below it (as printed).
    Additive,
}

/// Lever position to linear speed: 1 m/s at the detent, 1.5 at the top, 0 at the bottom.
pub fn speed_cap(jy: f64) -> f64 {
    if jy > 0.0 {
        1.0 + 0.5 * jy
    } else {
        1.0 + jy
    }
}

fn turn_rate(jx: f64, jy: f64, mapping: OmegaMapping) -> f64 {
    if jy > 0.0 {
        return jx;
    }
    match mapping {
        OmegaMapping::Multiplicative => jx * (1.0 + 0.8 * jy),
        OmegaMapping::Additive => jx + 0.8 * jy,
    }
}

/// Direct-drive command `(v_h, ω_h)` for a joystick state.
pub fn map_user_velocity(j: &Joystick, mapping: OmegaMapping) -> (f64, f64) {
    (speed_cap(j.jy), turn_rate(j.jx, j.jy, mapping))
}

/// Turn-rate cap in shared control: the multiplicative mapping at full deflection.
pub fn omega_limit(jy: f64) -> f64 {
    turn_rate(1.0, jy, OmegaMapping::Multiplicative)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerParams {
    /// Pure-pursuit lookahead along the path (m).
    pub lookahead: f64,
    /// Nominal speed (m/s).
    pub cruise: f64,
    /// Linear slowdown starts this far from the goal (m).
    pub slowdown_radius: f64,
    /// Arrival tolerance (m).
    pub goal_tolerance: f64,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            lookahead: 0.8,
            cruise: 1.0,
            slowdown_radius: 1.5,
            goal_tolerance: 0.5,
        }
    }
}

/// Point `distance` meters of arc beyond vertex `from`, clamped to the path end.
fn point_along(path: &GlobalPath, from: usize, distance: f64) -> Vec2 {
    let pts = path.points();
    let mut remaining = distance;
    for w in from..pts.len().saturating_sub(1) {
        let seg = pts[w + 1] - pts[w];
        let len = seg.norm();
        if remaining <= len {
            return pts[w] + seg * (remaining / len);
        }
        remaining -= len;
    }
    *pts.last().expect("non-empty path")
}

/// Pure-pursuit tracking of `path` toward `goal`.
///
/// When the target point is behind the robot it turns in place at full rate.
/// Turn commands beyond `omega_max` are met by slowing down along the same arc.
pub fn track_path(
    q: &RobotState,
    path: &GlobalPath,
    goal: Vec2,
    params: &TrackerParams,
    limits: &VelocityLimits,
) -> ControlInput {
    let pos = q.position();
    let to_goal = pos.distance(goal);
    if to_goal <= params.goal_tolerance || path.is_empty() {
        return ControlInput::ZERO;
    }
    let (from, _, _) = closest_point(path, pos);
    let target = point_along(path, from, params.lookahead);
    let offset = target - pos;
    if offset.norm() < 1e-9 {
        return ControlInput::ZERO;
    }
    let alpha = crate::sim::wrap_angle(offset.y.atan2(offset.x) - q.theta);

    if alpha.abs() > FRAC_PI_2 {
        return limits.saturate(0.0, alpha.signum() * limits.omega_max);
    }

    let mut v = params.cruise.min(limits.v_max);
    if to_goal < params.slowdown_radius {
        v *= to_goal / params.slowdown_radius;
    }
    let mut omega = 2.0 * v * alpha.sin() / params.lookahead;
    if omega.abs() > limits.omega_max {
        v *= limits.omega_max / omega.abs();
        omega = omega.signum() * limits.omega_max;
    }
    limits.saturate(v, omega)
}

/// Resolves the applied command from the mode, the delayed joystick and the
/// tracker output. Pure in its arguments.
pub fn arbitrate(
    mode: ControlMode,
    j: &Joystick,
    u_a: ControlInput,
    mapping: OmegaMapping,
    limits: &VelocityLimits,
) -> ControlInput {
    let v_cap = speed_cap(j.jy);
    match mode {
        ControlMode::ControlSwitching if j.trigger => {
            let (v_h, omega_h) = map_user_velocity(j, mapping);
            limits.saturate(v_h, omega_h)
        }
        ControlMode::ControlSwitching => limits.saturate(u_a.v().min(v_cap), u_a.omega()),
        ControlMode::SharedControl => {
            let w = omega_limit(j.jy);
            limits.saturate(u_a.v().min(v_cap), u_a.omega().clamp(-w, w))
        }
    }
}

/// Watches the delayed joystick for trigger releases in shared control and
/// emits the lateral offset `d = 5·jx` of each.
#[derive(Debug, Clone, Default)]
pub struct ReleaseDetector {
    was_pressed: bool,
}

/// Filter offset per unit of stick deflection (m).
pub const OFFSET_PER_UNIT: f64 = 5.0;

impl ReleaseDetector {
    pub fn observe(&mut self, mode: ControlMode, j: &Joystick) -> Option<f64> {
        let released = self.was_pressed && !j.trigger;
        self.was_pressed = j.trigger;
        filter_event(mode, released, j)
    }
}

/// Offset for a release edge observed in shared control; `None` otherwise.
pub fn filter_event(mode: ControlMode, release_edge: bool, j_at_release: &Joystick) -> Option<f64> {
    (mode == ControlMode::SharedControl && release_edge).then_some(OFFSET_PER_UNIT * j_at_release.jx)
}
