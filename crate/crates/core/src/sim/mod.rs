//! Fixed-step robot simulation: unicycle kinematics, local sensing, the
//! radiation field and the operator delay line.

mod delay;
mod radiation;
mod sensing;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;

pub use delay::DelayLine;
pub use radiation::{nearest_pool_distance, radiation_at, RadiationMetric};
pub use sensing::{sense, SensedObstacles};

/// Wraps an angle into (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// Configuration `q = (x, y, θ)` plus the last applied velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    #[serde(default)]
    pub v_actual: f64,
    #[serde(default)]
    pub omega_actual: f64,
}

impl RobotState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
            v_actual: 0.0,
            omega_actual: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    /// The robot-frame x-axis in world coordinates: 90° clockwise from the
    /// heading, so positive lateral offsets lie to the robot's right.
    pub fn lateral_axis(&self) -> Vec2 {
        self.heading().rotate_cw()
    }
}

/// Actuation limits defining the admissible control set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for VelocityLimits {
    fn default() -> Self {
        Self {
            v_max: 1.5,
            omega_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("control ({v}, {omega}) outside admissible set v∈[0,{v_max}], |ω|≤{omega_max}")]
pub struct InadmissibleControl {
    pub v: f64,
    pub omega: f64,
    pub v_max: f64,
    pub omega_max: f64,
}

/// An admissible control `u = (v, ω)`. Only constructible through
/// [`VelocityLimits`], so every value satisfies the actuation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ControlInput {
    v: f64,
    omega: f64,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput { v: 0.0, omega: 0.0 };

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

impl VelocityLimits {
    pub fn admit(&self, v: f64, omega: f64) -> Result<ControlInput, InadmissibleControl> {
        if (0.0..=self.v_max).contains(&v) && omega.abs() <= self.omega_max {
            Ok(ControlInput { v, omega })
        } else {
            Err(InadmissibleControl {
                v,
                omega,
                v_max: self.v_max,
                omega_max: self.omega_max,
            })
        }
    }

    /// Projects onto the admissible set. NaN components become zero.
    pub fn saturate(&self, v: f64, omega: f64) -> ControlInput {
        let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, self.v_max) };
        let omega = if omega.is_nan() {
            0.0
        } else {
            omega.clamp(-self.omega_max, self.omega_max)
        };
        ControlInput { v, omega }
    }
}

/// Tick counter; time is always derived as `tick · dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock {
    dt: f64,
    tick: u64,
}

impl SimClock {
    pub fn new(dt: f64) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "dt must be positive");
        Self { dt, tick: 0 }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.dt
    }

    pub fn advance(&mut self) {
        self.tick += 1;
    }
}

/// One explicit-Euler step of the unicycle model.
pub fn step_kinematics(q: &RobotState, u: ControlInput, dt: f64) -> RobotState {
    debug_assert!(dt > 0.0);
    RobotState {
        x: q.x + u.v * q.theta.cos() * dt,
        y: q.y + u.v * q.theta.sin() * dt,
        theta: wrap_angle(q.theta + u.omega * dt),
        v_actual: u.v,
        omega_actual: u.omega,
    }
}
