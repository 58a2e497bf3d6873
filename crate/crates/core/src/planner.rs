//! A* over the composed costmap on an 8-connected grid.
//!
//! Edge costs are `step_length · (1 + β·g(dest)/255)`, held in fixed point
//! (integer units of `resolution / (1000·255)` meters) so that path costs
//! compare exactly regardless of summation order.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::SQRT_2;

use thiserror::Error;

use crate::costmap::{Costmap, GridSpec, LETHAL};
use crate::geom::Vec2;

/// Fixed-point units per (resolution · 255).
pub const COST_SCALE: u64 = 1000;

/// Default weight of the 0–255 cell cost relative to distance.
pub const DEFAULT_BETA: f64 = 30.0;

/// Per-cost-value edge weights for straight and diagonal moves.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCosts {
    beta: f64,
    straight: [u64; 256],
    diagonal: [u64; 256],
    h_straight: u64,
    h_diagonal: u64,
}

impl EdgeCosts {
    pub fn new(beta: f64) -> Self {
        assert!(beta >= 0.0 && beta.is_finite(), "β must be finite and ≥ 0");
        let scale = COST_SCALE as f64;
        let mut straight = [0u64; 256];
        let mut diagonal = [0u64; 256];
        for g in 0..256 {
            let w = 255.0 + beta * g as f64;
            straight[g] = (scale * w).round() as u64;
            diagonal[g] = (scale * SQRT_2 * w).round() as u64;
        }
        let h_straight = straight[0];
        let h_diagonal = ((scale * SQRT_2 * 255.0).floor() as u64).min(diagonal[0]);
        Self {
            beta,
            straight,
            diagonal,
            h_straight,
            h_diagonal,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn straight(&self, g: u8) -> u64 {
        self.straight[g as usize]
    }

    pub fn diagonal(&self, g: u8) -> u64 {
        self.diagonal[g as usize]
    }

    /// Octile distance in the same units; never exceeds the true remaining cost.
    pub fn heuristic(&self, a: (usize, usize), b: (usize, usize)) -> u64 {
        let dx = a.0.abs_diff(b.0) as u64;
        let dy = a.1.abs_diff(b.1) as u64;
        let (lo, hi) = (dx.min(dy), dx.max(dy));
        self.h_straight * (hi - lo) + self.h_diagonal * lo
    }

    pub fn to_meters(cost: u64, resolution: f64) -> f64 {
        cost as f64 * resolution / (COST_SCALE as f64 * 255.0)
    }
}

impl Default for EdgeCosts {
    fn default() -> Self {
        Self::new(DEFAULT_BETA)
    }
}

/// Planner output: cell-center waypoints with their cost-to-come.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GlobalPath {
    points: Vec<Vec2>,
    cells: Vec<usize>,
    cost_to_come: Vec<u64>,
    length: f64,
}

impl GlobalPath {
    /// A path with geometry only (no grid cells or costs attached).
    pub fn from_points(points: Vec<Vec2>) -> Self {
        let length = points.windows(2).map(|w| w[0].distance(w[1])).sum();
        Self {
            points,
            cells: Vec::new(),
            cost_to_come: Vec::new(),
            length,
        }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Arc length (m).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Sum of edge costs in fixed-point units, when planned on a grid.
    pub fn total_cost(&self) -> Option<u64> {
        self.cost_to_come.last().copied()
    }

    pub fn cost_to_come(&self) -> &[u64] {
        &self.cost_to_come
    }

    /// Cost from vertex `i` to the end of the path.
    pub fn remaining_cost(&self, i: usize) -> Option<u64> {
        Some(self.total_cost()? - self.cost_to_come.get(i)?)
    }
}

/// Euclidean-closest vertex of `path` to `p` as `(index, vertex, arc position)`.
/// Ties go to the earlier vertex.
pub fn closest_point(path: &GlobalPath, p: Vec2) -> (usize, Vec2, f64) {
    assert!(!path.is_empty(), "closest_point on empty path");
    let pts = path.points();
    let mut best = (0usize, f64::INFINITY);
    for (i, v) in pts.iter().enumerate() {
        let d = v.distance(p);
        if d < best.1 {
            best = (i, d);
        }
    }
    let arc = pts[..=best.0].windows(2).map(|w| w[0].distance(w[1])).sum();
    (best.0, pts[best.0], arc)
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PlanError {
    #[error("start ({0:?}) lies outside the grid")]
    StartOutside(Vec2),
    #[error("goal ({0:?}) lies outside the grid")]
    GoalOutside(Vec2),
    #[error("start cell is lethal")]
    StartLethal,
    #[error("goal cell is lethal")]
    GoalLethal,
    #[error("no path to goal through non-lethal cells")]
    NoPath,
}

pub struct PlanRequest<'a> {
    pub start: Vec2,
    pub goal: Vec2,
    pub costmap: &'a Costmap,
    pub edge_costs: &'a EdgeCosts,
}

const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Successors of `cell` with their edge costs. Diagonal moves may not cut
/// between lethal cells.
pub fn neighbors<'a>(
    costmap: &'a Costmap,
    edges: &'a EdgeCosts,
    cell: usize,
) -> impl Iterator<Item = (usize, u64)> + 'a {
    let spec = *costmap.spec();
    let (x, y) = spec.coords(cell);
    NEIGHBORS.iter().filter_map(move |&(dx, dy)| {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        if nx < 0 || ny < 0 || nx >= spec.width as i64 || ny >= spec.height as i64 {
            return None;
        }
        let n = spec.index(nx as usize, ny as usize);
        let g = costmap.at(n);
        if g == LETHAL {
            return None;
        }
        if dx != 0 && dy != 0 {
            let side_a = spec.index(nx as usize, y);
            let side_b = spec.index(x, ny as usize);
            if costmap.is_lethal(side_a) || costmap.is_lethal(side_b) {
                return None;
            }
            Some((n, edges.diagonal(g)))
        } else {
            Some((n, edges.straight(g)))
        }
    })
}

/// Plans between two cell indices.
pub fn plan_cells(
    costmap: &Costmap,
    edge_costs: &EdgeCosts,
    start: usize,
    goal: usize,
) -> Result<GlobalPath, PlanError> {
    let spec: GridSpec = *costmap.spec();
    if costmap.is_lethal(start) {
        return Err(PlanError::StartLethal);
    }
    if costmap.is_lethal(goal) {
        return Err(PlanError::GoalLethal);
    }
    let goal_xy = spec.coords(goal);
    let n = spec.len();
    let mut best = vec![u64::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    // (f, h, index): lowest f, then lowest h, then lowest index.
    let mut open = BinaryHeap::new();
    best[start] = 0;
    let h0 = edge_costs.heuristic(spec.coords(start), goal_xy);
    open.push(Reverse((h0, h0, start)));

    while let Some(Reverse((_, _, cell))) = open.pop() {
        if closed[cell] {
            continue;
        }
        closed[cell] = true;
        if cell == goal {
            break;
        }
        let g = best[cell];
        for (next, w) in neighbors(costmap, edge_costs, cell) {
            if closed[next] {
                continue;
            }
            let cand = g + w;
            if cand < best[next] {
                best[next] = cand;
                parent[next] = cell;
                let h = edge_costs.heuristic(spec.coords(next), goal_xy);
                open.push(Reverse((cand + h, h, next)));
            }
        }
    }
    if !closed[goal] {
        return Err(PlanError::NoPath);
    }

    let mut cells = vec![goal];
    while let Some(&last) = cells.last() {
        if last == start {
            break;
        }
        cells.push(parent[last]);
    }
    cells.reverse();
    let points: Vec<Vec2> = cells.iter().map(|&c| spec.center_of(c)).collect();
    let cost_to_come = cells.iter().map(|&c| best[c]).collect();
    let mut path = GlobalPath::from_points(points);
    path.cells = cells;
    path.cost_to_come = cost_to_come;
    Ok(path)
}

/// Plans from `req.start` to `req.goal`, each snapped to its nearest cell.
pub fn plan(req: &PlanRequest<'_>) -> Result<GlobalPath, PlanError> {
    let spec = req.costmap.spec();
    let start = spec
        .world_to_index(req.start)
        .ok_or(PlanError::StartOutside(req.start))?;
    let goal = spec
        .world_to_index(req.goal)
        .ok_or(PlanError::GoalOutside(req.goal))?;
    plan_cells(req.costmap, req.edge_costs, start, goal)
}

/// Nearest non-lethal cell to `cell` by breadth-first search over the grid.
pub fn nearest_free_cell(costmap: &Costmap, cell: usize) -> Option<usize> {
    if !costmap.is_lethal(cell) {
        return Some(cell);
    }
    let spec = *costmap.spec();
    let origin = spec.center_of(cell);
    let mut seen = vec![false; spec.len()];
    let mut queue = VecDeque::from([cell]);
    seen[cell] = true;
    let mut best: Option<(f64, usize)> = None;
    while let Some(c) = queue.pop_front() {
        let d = spec.center_of(c).distance(origin);
        if let Some((bd, _)) = best {
            // BFS layers only grow; stop once a layer is entirely farther out.
            if d > bd + spec.resolution * 2.0 {
                break;
            }
        }
        if !costmap.is_lethal(c) {
            if best.is_none_or(|(bd, bc)| d < bd || (d == bd && c < bc)) {
                best = Some((d, c));
            }
            continue;
        }
        let (x, y) = spec.coords(c);
        for (dx, dy) in NEIGHBORS {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= spec.width as i64 || ny >= spec.height as i64 {
                continue;
            }
            let n = spec.index(nx as usize, ny as usize);
            if !seen[n] {
                seen[n] = true;
                queue.push_back(n);
            }
        }
    }
    best.map(|(_, c)| c)
}
