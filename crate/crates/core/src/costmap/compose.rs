use serde::{Deserialize, Serialize};

use crate::par::{map_indices, Parallelism};

use super::{g_ui_at, CostFilterParams, CostFrame, Costmap, LETHAL};

/// A placed cost filter: offset, frame and shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveFilter {
    /// Lateral offset the operator selected (m); its sign picks the preferred side.
    pub d: f64,
    pub frame: CostFrame,
    pub params: CostFilterParams,
}

impl ActiveFilter {
    pub fn side(&self) -> f64 {
        if self.d == 0.0 {
            0.0
        } else {
            self.d.signum()
        }
    }

    pub fn g_ui(&self, p: crate::geom::Vec2) -> u8 {
        g_ui_at(p, &self.frame, self.side(), &self.params)
    }
}

/// Combines the obstacle layer with an optional filter:
/// `min(255, max(g_obs, g_obs + g_ui))`, lethal cells untouched.
pub fn compose(g_obs: &Costmap, filter: Option<&ActiveFilter>, exec: Parallelism) -> Costmap {
    let Some(filter) = filter else {
        return g_obs.clone();
    };
    let spec = *g_obs.spec();
    let cells = map_indices(spec.len(), exec, |i| {
        let base = g_obs.at(i);
        if base == LETHAL {
            return LETHAL;
        }
        let ui = filter.g_ui(spec.center_of(i));
        base.max(base.saturating_add(ui))
    });
    Costmap::new(spec, cells)
}
