use crate::geom::Vec2;
use crate::par::{for_each_chunk_mut, Parallelism};
use crate::scenario::{Shape, WorldModel};
use crate::sim::SensedObstacles;

use super::GridSpec;

/// Cells whose centers fall inside the inflated obstacle set.
#[derive(Debug, Clone, PartialEq)]
pub struct LethalMask {
    spec: GridSpec,
    lethal: Vec<bool>,
}

impl LethalMask {
    pub fn empty(spec: GridSpec) -> Self {
        Self {
            spec,
            lethal: vec![false; spec.len()],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[bool] {
        &self.lethal
    }

    pub fn is_lethal(&self, index: usize) -> bool {
        self.lethal[index]
    }

    pub fn count(&self) -> usize {
        self.lethal.iter().filter(|&&l| l).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.lethal.iter().any(|&l| l)
    }

    pub fn union(&self, other: &LethalMask) -> LethalMask {
        assert_eq!(self.spec, other.spec);
        LethalMask {
            spec: self.spec,
            lethal: self
                .lethal
                .iter()
                .zip(&other.lethal)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    /// Marks cells whose centers lie within `margin` of the rectangle border
    /// `min`–`max`, keeping the footprint inside the world.
    pub fn mark_border(&mut self, min: Vec2, max: Vec2, margin: f64) {
        for i in 0..self.lethal.len() {
            let c = self.spec.center_of(i);
            let inner = (c.x - min.x)
                .min(max.x - c.x)
                .min(c.y - min.y)
                .min(max.y - c.y);
            if inner <= margin {
                self.lethal[i] = true;
            }
        }
    }
}

/// Discrete Minkowski sum of `shapes` with a disk of `robot_radius`: a cell
/// is lethal iff its center lies within `robot_radius` of some shape.
pub fn inflate_shapes(
    shapes: &[&Shape],
    robot_radius: f64,
    spec: &GridSpec,
    exec: Parallelism,
) -> LethalMask {
    assert!(robot_radius >= 0.0);
    let mut mask = LethalMask::empty(*spec);
    if spec.is_empty() {
        return mask;
    }
    let boxes: Vec<(Vec2, Vec2)> = shapes
        .iter()
        .map(|s| {
            let (lo, hi) = s.bounding_box();
            let pad = Vec2::new(robot_radius, robot_radius);
            (lo - pad, hi + pad)
        })
        .collect();
    let res = spec.resolution;
    let width = spec.width;
    for_each_chunk_mut(&mut mask.lethal, width, exec, |iy, row| {
        let y = spec.origin.y + iy as f64 * res;
        for (shape, (lo, hi)) in shapes.iter().zip(&boxes) {
            if y < lo.y || y > hi.y {
                continue;
            }
            let x0 = (((lo.x - spec.origin.x) / res).floor().max(0.0)) as usize;
            let x1 = (((hi.x - spec.origin.x) / res).ceil().max(0.0) as usize).min(width - 1);
            for (ix, cell) in row.iter_mut().enumerate().take(x1 + 1).skip(x0) {
                if !*cell {
                    let c = Vec2::new(spec.origin.x + ix as f64 * res, y);
                    *cell = shape.distance(c) <= robot_radius;
                }
            }
        }
    });
    mask
}

/// Inflates the obstacles currently known to the robot.
pub fn inflate_obstacles(
    world: &WorldModel,
    sensed: &SensedObstacles,
    robot_radius: f64,
    spec: &GridSpec,
    exec: Parallelism,
) -> LethalMask {
    let shapes: Vec<&Shape> = sensed.indices().map(|i| &world.obstacles[i].shape).collect();
    inflate_shapes(&shapes, robot_radius, spec, exec)
}
