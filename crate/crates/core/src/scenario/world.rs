//! World documents: bounds, obstacles, toxic pools, start and goal.
//!
//! ```json
//! {
//!   "bounds": { "min": [0.0, 0.0], "max": [30.0, 30.0] },
//!   "start": { "x": 15.0, "y": 2.5, "theta": 1.5707963267948966 },
//!   "goal": [15.0, 27.5],
//!   "obstacles": [
//!     { "id": "hut", "shape": { "type": "polygon", "points": [[1,1],[3,1],[3,3]] }, "a_priori": true },
//!     { "id": "worker-1", "shape": { "type": "circle", "center": [15, 12], "radius": 0.3 }, "a_priori": false }
//!   ],
//!   "pools": [ { "id": "pool-1", "center": [12, 18], "radius": 1.5, "intensity": 1.0, "fade": 3.0 } ]
//! }
//! ```

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{point_in_polygon, segment_distance, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Circle { center: Vec2, radius: f64 },
    Polygon { points: Vec<Vec2> },
}

impl Shape {
    /// Distance from `p` to the shape; zero inside.
    pub fn distance(&self, p: Vec2) -> f64 {
        match self {
            Shape::Circle { center, radius } => (p.distance(*center) - radius).max(0.0),
            Shape::Polygon { points } => {
                if point_in_polygon(p, points) {
                    return 0.0;
                }
                let n = points.len();
                (0..n)
                    .map(|i| segment_distance(p, points[i], points[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match self {
            Shape::Circle { center, radius } => {
                let r = Vec2::new(*radius, *radius);
                (*center - r, *center + r)
            }
            Shape::Polygon { points } => points.iter().fold(
                (
                    Vec2::new(f64::INFINITY, f64::INFINITY),
                    Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
                ),
                |(lo, hi), p| {
                    (
                        Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
                        Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
                    )
                },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: String,
    pub shape: Shape,
    /// Known to the robot before the run; otherwise discovered by sensing.
    #[serde(default)]
    pub a_priori: bool,
}

fn default_intensity() -> f64 {
    1.0
}

fn default_fade() -> f64 {
    3.0
}

/// A toxic pool. Not an obstacle: the robot cannot perceive it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pool {
    pub id: String,
    pub center: Vec2,
    pub radius: f64,
    #[serde(default = "default_intensity")]
    pub intensity: f64,
    /// Width of the linear falloff outside the pool edge (m).
    #[serde(default = "default_fade")]
    pub fade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldModel {
    pub bounds: Bounds,
    pub start: Pose,
    pub goal: Vec2,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub pools: Vec<Pool>,
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("world document is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid world entity `{entity}`: {reason}")]
    Validation { entity: String, reason: String },
}

fn invalid(entity: impl Into<String>, reason: impl Into<String>) -> WorldError {
    WorldError::Validation {
        entity: entity.into(),
        reason: reason.into(),
    }
}

fn finite(v: Vec2) -> bool {
    v.x.is_finite() && v.y.is_finite()
}

/// Parses and validates a world document.
pub fn load_world(document: &str) -> Result<WorldModel, WorldError> {
    let world: WorldModel = serde_json::from_str(document)?;
    world.validate()?;
    Ok(world)
}

impl WorldModel {
    /// Canonical pretty-printed document.
    pub fn to_document(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("world serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let b = &self.bounds;
        if !(finite(b.min) && finite(b.max) && b.min.x < b.max.x && b.min.y < b.max.y) {
            return Err(invalid("bounds", "min must be strictly below max"));
        }

        let mut ids = HashSet::new();
        for o in &self.obstacles {
            if o.id.is_empty() {
                return Err(invalid("<unnamed obstacle>", "id must not be empty"));
            }
            if !ids.insert(o.id.as_str()) {
                return Err(invalid(&o.id, "duplicate id"));
            }
            match &o.shape {
                Shape::Circle { center, radius } => {
                    if !finite(*center) || !(*radius >= 0.0 && radius.is_finite()) {
                        return Err(invalid(&o.id, "circle needs a finite center and radius ≥ 0"));
                    }
                }
                Shape::Polygon { points } => {
                    if points.len() < 3 || !points.iter().all(|p| finite(*p)) {
                        return Err(invalid(&o.id, "polygon needs at least 3 finite points"));
                    }
                }
            }
            let (lo, hi) = o.shape.bounding_box();
            if !(b.contains(lo) && b.contains(hi)) {
                return Err(invalid(&o.id, "shape extends outside the world bounds"));
            }
        }
        for p in &self.pools {
            if p.id.is_empty() {
                return Err(invalid("<unnamed pool>", "id must not be empty"));
            }
            if !ids.insert(p.id.as_str()) {
                return Err(invalid(&p.id, "duplicate id"));
            }
            if !b.contains(p.center) {
                return Err(invalid(&p.id, "center outside the world bounds"));
            }
            if !(p.radius >= 0.0 && p.intensity >= 0.0 && p.fade >= 0.0)
                || !(p.radius.is_finite() && p.intensity.is_finite() && p.fade.is_finite())
            {
                return Err(invalid(&p.id, "radius, intensity and fade must be finite and ≥ 0"));
            }
        }

        let start = self.start.position();
        if !finite(start) || !self.start.theta.is_finite() || !b.contains(start) {
            return Err(invalid("start", "must be a finite pose inside the bounds"));
        }
        if !finite(self.goal) || !b.contains(self.goal) {
            return Err(invalid("goal", "must lie inside the bounds"));
        }
        for o in &self.obstacles {
            if o.shape.distance(start) == 0.0 {
                return Err(invalid("start", format!("lies inside obstacle `{}`", o.id)));
            }
            if o.shape.distance(self.goal) == 0.0 {
                return Err(invalid("goal", format!("lies inside obstacle `{}`", o.id)));
            }
        }
        Ok(())
    }

    /// Footprint clearance: distance from `p` to the nearest obstacle surface
    /// minus `robot_radius`. `None` when the world has no obstacles.
    pub fn clearance(&self, p: Vec2, robot_radius: f64) -> Option<f64> {
        self.obstacles
            .iter()
            .map(|o| o.shape.distance(p))
            .min_by(f64::total_cmp)
            .map(|d| d - robot_radius)
    }
}
