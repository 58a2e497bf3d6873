//! The operator's cost filter: a low-cost valley of width `w` and length `l`
//! laid along the cost frame's y-axis, with strength `s` everywhere else.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;

use super::CostFrame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostFilterParams {
    /// Valley width (m).
    pub w: f64,
    /// Valley length along the travel direction (m).
    pub l: f64,
    /// Filter strength in cost channels.
    pub s: u8,
    /// Side multiplier (≥ 1) lowering cost on the side the operator pointed to.
    pub p: f64,
}

impl Default for CostFilterParams {
    fn default() -> Self {
        Self {
            w: 3.0,
            l: 5.0,
            s: 100,
            p: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterParamError {
    #[error("valley width w must be > 0, got {0}")]
    Width(f64),
    #[error("valley length l must be > 0, got {0}")]
    Length(f64),
    #[error("side multiplier p must be ≥ 1, got {0}")]
    SideMultiplier(f64),
}

impl CostFilterParams {
    pub fn validate(&self) -> Result<(), FilterParamError> {
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(FilterParamError::Width(self.w));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(FilterParamError::Length(self.l));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(FilterParamError::SideMultiplier(self.p));
        }
        Ok(())
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Lateral influence: ≈ (1+p)σ(4) − 1 at the valley center, 0 on the far
/// non-preferred side and p − 1 on the far preferred side.
///
/// `side` is the sign of the offset `d`; with `side == 0` the valley is
/// symmetric and `p` is ignored.
pub fn f_lat(c_x: f64, w: f64, p: f64, side: f64) -> f64 {
    let (xi, p) = if side == 0.0 { (c_x, 1.0) } else { (c_x * side.signum(), p) };
    let k = 16.0 / w;
    let b = w / 4.0;
    p * sigmoid(k * (b + xi)) + sigmoid(k * (b - xi)) - 1.0
}

/// Longitudinal influence: a plateau from just behind the frame origin to about `l` ahead.
pub fn f_lon(c_y: f64, l: f64) -> f64 {
    1.0 / ((1.0 + (2.0 * c_y - 2.0 * l).exp()) * (1.0 + (-4.0 * c_y - 2.0).exp()))
}

/// Filter cost at cost-frame coordinates `(c_x, c_y)`.
pub fn g_ui_local(c_x: f64, c_y: f64, side: f64, params: &CostFilterParams) -> u8 {
    let s = f64::from(params.s);
    let raw = s * (1.0 - f_lat(c_x, params.w, params.p, side) * f_lon(c_y, params.l));
    raw.clamp(0.0, 255.0).round() as u8
}

/// Filter cost at a world point.
pub fn g_ui_at(point: Vec2, frame: &CostFrame, side: f64, params: &CostFilterParams) -> u8 {
    let (c_x, c_y) = frame.to_local(point);
    g_ui_local(c_x, c_y, side, params)
}
