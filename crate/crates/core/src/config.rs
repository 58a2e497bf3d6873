use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{OmegaMapping, TrackerParams};
use crate::costmap::{CostFilterParams, DecayParams, FilterParamError};
use crate::par::Parallelism;
use crate::sim::{RadiationMetric, VelocityLimits};

/// Every tunable of a simulated run. Missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Operator input latency (s); must be a multiple of `dt`.
    pub latency: f64,
    /// Delay on state fed back to a live operator (s); must be a multiple of `dt`.
    pub feedback_delay: f64,
    pub limits: VelocityLimits,
    pub robot_radius: f64,
    pub sensor_range: f64,
    /// Scheduled replanning rate (Hz).
    pub replan_hz: f64,
    /// Costmap cell size (m).
    pub resolution: f64,
    pub decay: DecayParams,
    /// Weight of the 0–255 cost in traversal cost.
    pub beta: f64,
    /// Shape of the operator's cost filter; the offset comes from the joystick.
    pub filter: CostFilterParams,
    pub tracker: TrackerParams,
    pub omega_mapping: OmegaMapping,
    pub radiation_metric: RadiationMetric,
    /// Run timeout (s).
    pub timeout: f64,
    pub parallelism: Parallelism,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            latency: 1.0,
            feedback_delay: 0.0,
            limits: VelocityLimits::default(),
            robot_radius: 0.35,
            sensor_range: 8.0,
            replan_hz: 2.0,
            resolution: 0.1,
            decay: DecayParams::default(),
            beta: crate::planner::DEFAULT_BETA,
            filter: CostFilterParams::default(),
            tracker: TrackerParams::default(),
            omega_mapping: OmegaMapping::default(),
            radiation_metric: RadiationMetric::default(),
            timeout: 600.0,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} ({value} s) must be a non-negative multiple of dt ({dt} s)")]
    NotTickMultiple { name: &'static str, value: f64, dt: f64 },
    #[error("filter: {0}")]
    Filter(#[from] FilterParamError),
}

fn positive(name: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::NotPositive { name, value })
    }
}

/// `value / dt` as a tick count, if it is (within round-off) a whole number.
pub fn ticks_of(value: f64, dt: f64) -> Option<u64> {
    let n = value / dt;
    let r = n.round();
    (value >= 0.0 && value.is_finite() && (n - r).abs() < 1e-6).then_some(r as u64)
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("dt", self.dt)?;
        positive("robot_radius", self.robot_radius)?;
        positive("sensor_range", self.sensor_range)?;
        positive("replan_hz", self.replan_hz)?;
        positive("resolution", self.resolution)?;
        positive("timeout", self.timeout)?;
        positive("limits.v_max", self.limits.v_max)?;
        positive("limits.omega_max", self.limits.omega_max)?;
        positive("decay.gamma", self.decay.gamma)?;
        positive("tracker.lookahead", self.tracker.lookahead)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(ConfigError::NotPositive {
                name: "beta",
                value: self.beta,
            });
        }
        for (name, value) in [("latency", self.latency), ("feedback_delay", self.feedback_delay)] {
            if ticks_of(value, self.dt).is_none() {
                return Err(ConfigError::NotTickMultiple {
                    name,
                    value,
                    dt: self.dt,
                });
            }
        }
        self.filter.validate()?;
        Ok(())
    }

    /// Ticks between scheduled replans (at least one).
    pub fn replan_period_ticks(&self) -> u64 {
        ((1.0 / (self.replan_hz * self.dt)).round() as u64).max(1)
    }

    pub fn feedback_delay_ticks(&self) -> u64 {
        ticks_of(self.feedback_delay, self.dt).unwrap_or(0)
    }
}
