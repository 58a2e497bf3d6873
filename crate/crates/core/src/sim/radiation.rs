use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::scenario::WorldModel;

/// What gets integrated over time for the cumulative radiation metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiationMetric {
    /// Pool intensity field at the robot position (linear fade outside each pool).
    #[default]
    Intensity,
    /// Raw distance to the nearest pool boundary.
    NearestPoolDistance,
}

impl RadiationMetric {
    pub fn sample(self, world: &WorldModel, p: Vec2) -> f64 {
        match self {
            RadiationMetric::Intensity => radiation_at(world, p),
            RadiationMetric::NearestPoolDistance => nearest_pool_distance(world, p).unwrap_or(0.0),
        }
    }
}

/// Sum over pools of `I₀ · clamp(1 − max(0, dist − radius) / fade, 0, 1)`.
pub fn radiation_at(world: &WorldModel, p: Vec2) -> f64 {
    world
        .pools
        .iter()
        .map(|pool| {
            let outside = (p.distance(pool.center) - pool.radius).max(0.0);
            let ramp = if pool.fade > 0.0 {
                (1.0 - outside / pool.fade).clamp(0.0, 1.0)
            } else if outside == 0.0 {
                1.0
            } else {
                0.0
            };
            pool.intensity * ramp
        })
        .sum()
}

/// Distance to the closest pool boundary (0 inside a pool); `None` without pools.
pub fn nearest_pool_distance(world: &WorldModel, p: Vec2) -> Option<f64> {
    world
        .pools
        .iter()
        .map(|pool| (p.distance(pool.center) - pool.radius).max(0.0))
        .min_by(f64::total_cmp)
}
