//! Quantized planning costmap.
//!
//! The planning cost of a cell is `min(255, g_obs + g_ui)`, where `g_obs`
//! comes from inflated obstacles with exponential decay and `g_ui` is the
//! operator's cost valley expressed in a rotated cost frame. Lethal cells
//! (inside inflated obstacles) stay at 255 regardless of the filter.

mod compose;
mod decay;
mod dump;
mod filter;
mod frame;
mod inflate;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::scenario::Bounds;

pub use compose::{compose, ActiveFilter};
pub use decay::{compute_g_obs, squared_distance_transform, DecayParams};
pub use dump::{parse_csv, CostmapHeader, DumpError};
pub use filter::{f_lat, f_lon, g_ui_at, g_ui_local, CostFilterParams, FilterParamError};
pub use frame::{build_cost_frame, fit_direction, CostFrame, FIT_ARC_LENGTH};
pub use inflate::{inflate_obstacles, inflate_shapes, LethalMask};

/// Cost of cells inside inflated obstacles.
pub const LETHAL: u8 = 255;

/// Regular grid whose cell `(0, 0)` is centered on `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec2,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(origin: Vec2, resolution: f64, width: usize, height: usize) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            origin,
            resolution,
            width,
            height,
        }
    }

    /// Smallest grid with cell centers on `bounds.min + k·resolution` that covers `bounds`.
    pub fn covering(bounds: &Bounds, resolution: f64) -> Self {
        let span = bounds.max - bounds.min;
        // Tolerate round-off when the span is an exact multiple of the resolution.
        let cells = |len: f64| ((len / resolution) - 1e-9).ceil().max(0.0) as usize + 1;
        Self::new(bounds.min, resolution, cells(span.x), cells(span.y))
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + ix as f64 * self.resolution,
            self.origin.y + iy as f64 * self.resolution,
        )
    }

    pub fn center_of(&self, index: usize) -> Vec2 {
        let (ix, iy) = self.coords(index);
        self.cell_center(ix, iy)
    }

    /// Cell whose center is nearest `p`, if inside the grid.
    pub fn world_to_cell(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.resolution).round();
        let fy = ((p.y - self.origin.y) / self.resolution).round();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn world_to_index(&self, p: Vec2) -> Option<usize> {
        self.world_to_cell(p).map(|(x, y)| self.index(x, y))
    }
}

/// Per-cell integer costs in `0..=255`, row-major with `y` as the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    spec: GridSpec,
    cells: Vec<u8>,
}

impl Costmap {
    pub fn new(spec: GridSpec, cells: Vec<u8>) -> Self {
        assert_eq!(spec.len(), cells.len(), "cell count must match grid");
        Self { spec, cells }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::new(spec, vec![0; spec.len()])
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn get(&self, ix: usize, iy: usize) -> u8 {
        self.cells[self.spec.index(ix, iy)]
    }

    pub fn at(&self, index: usize) -> u8 {
        self.cells[index]
    }

    pub fn is_lethal(&self, index: usize) -> bool {
        self.cells[index] == LETHAL
    }

    pub fn cost_at_world(&self, p: Vec2) -> Option<u8> {
        self.spec.world_to_index(p).map(|i| self.cells[i])
    }
}
