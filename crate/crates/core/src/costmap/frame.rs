use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::planner::{closest_point, GlobalPath};
use crate::sim::RobotState;

/// Arc length of path used to estimate the travel direction (m).
pub const FIT_ARC_LENGTH: f64 = 5.0;

/// Reference frame of the cost filter. `y_axis` follows the fitted path
/// direction; `x_axis` is `y_axis` rotated by −90°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFrame {
    pub origin: Vec2,
    pub x_axis: Vec2,
    pub y_axis: Vec2,
}

impl CostFrame {
    pub fn new(origin: Vec2, y_axis: Vec2) -> Self {
        let y_axis = y_axis.normalized().expect("frame direction must be non-zero");
        Self {
            origin,
            x_axis: y_axis.rotate_cw(),
            y_axis,
        }
    }

    /// World point to frame coordinates `(c_x, c_y)`.
    pub fn to_local(&self, p: Vec2) -> (f64, f64) {
        let r = p - self.origin;
        (r.dot(self.x_axis), r.dot(self.y_axis))
    }

    pub fn to_world(&self, c_x: f64, c_y: f64) -> Vec2 {
        self.origin + self.x_axis * c_x + self.y_axis * c_y
    }
}

/// Places the frame origin `d` meters along the robot's lateral axis
/// (positive to the right of the heading) and aligns it with `dir`.
pub fn build_cost_frame(q: &RobotState, d: f64, dir: Vec2) -> CostFrame {
    CostFrame::new(q.position() + q.lateral_axis() * d, dir)
}

/// Total-least-squares direction of the next `arc_len` meters of `path`,
/// starting at the vertex closest to the robot and oriented along the path.
/// Falls back to the robot heading when the window is a single point.
pub fn fit_direction(path: &GlobalPath, q: &RobotState, arc_len: f64) -> Vec2 {
    let fallback = q.heading();
    if path.is_empty() {
        return fallback;
    }
    let pts = path.points();
    let (start, _, _) = closest_point(path, q.position());
    let mut end = start;
    let mut travelled = 0.0;
    while end + 1 < pts.len() {
        let step = pts[end].distance(pts[end + 1]);
        if travelled + step > arc_len + 1e-9 {
            break;
        }
        travelled += step;
        end += 1;
    }
    let window = &pts[start..=end];
    if window.len() < 2 {
        return fallback;
    }

    let n = window.len() as f64;
    let mean = window.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &p in window {
        let r = p - mean;
        sxx += r.x * r.x;
        syy += r.y * r.y;
        sxy += r.x * r.y;
    }
    if sxx + syy == 0.0 {
        return fallback;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let axis = Vec2::from_angle(angle);
    let progress = window[window.len() - 1] - window[0];
    if axis.dot(progress) < 0.0 {
        -axis
    } else {
        axis
    }
}
