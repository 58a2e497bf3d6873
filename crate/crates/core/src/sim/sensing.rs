use std::collections::BTreeSet;

use crate::geom::Vec2;
use crate::scenario::WorldModel;

/// Obstacles known to the robot at the current tick, by index into
/// [`WorldModel::obstacles`]. Knowledge only ever grows within a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SensedObstacles {
    known: BTreeSet<usize>,
    sensor_range: f64,
}

impl SensedObstacles {
    /// Starts with every a-priori obstacle known.
    pub fn new(world: &WorldModel, sensor_range: f64) -> Self {
        assert!(sensor_range > 0.0, "sensor range must be positive");
        let known = world
            .obstacles
            .iter()
            .enumerate()
            .filter(|(_, o)| o.a_priori)
            .map(|(i, _)| i)
            .collect();
        Self {
            known,
            sensor_range,
        }
    }

    pub fn sensor_range(&self) -> f64 {
        self.sensor_range
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.known.contains(&index)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.known.iter().copied()
    }

    /// Adds every obstacle whose boundary lies within range of `pos`.
    /// Returns whether anything new was learned.
    pub fn update(&mut self, world: &WorldModel, pos: Vec2) -> bool {
        let before = self.known.len();
        for (i, o) in world.obstacles.iter().enumerate() {
            if !self.known.contains(&i) && o.shape.distance(pos) <= self.sensor_range {
                self.known.insert(i);
            }
        }
        self.known.len() != before
    }
}

/// Pure form of [`SensedObstacles::update`].
pub fn sense(world: &WorldModel, pos: Vec2, known: &SensedObstacles) -> SensedObstacles {
    let mut next = known.clone();
    next.update(world, pos);
    next
}
