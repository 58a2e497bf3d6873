//! Worlds, operator traces, the simulation loop and run metrics.

mod record;
mod session;
mod trace;
mod world;

use std::sync::Arc;

use crate::config::{ConfigError, SimConfig};
use crate::controller::ControlMode;
use crate::costmap::{compose, ActiveFilter, Costmap};
use crate::par::{map_slice, Parallelism};
use crate::planner::{EdgeCosts, GlobalPath, PlanError};
use crate::sim::{RobotState, SensedObstacles};

pub use record::{cumulative_radiation, summarize, FilterRow, Outcome, RecordError, RunRecord, Summary, TickRow};
pub use session::{obstacle_layer, place_filter, plan_from, Session, Snapshot};
pub use trace::{InputTrace, TraceError, TraceEvent};
pub use world::{load_world, Bounds, Obstacle, Pool, Pose, Shape, WorldError, WorldModel};

/// Runs `world` under `mode`, replaying `trace` as the operator, until the
/// goal is reached or the timeout expires. A timeout is reported in the
/// record's summary, not as an error.
pub fn run(
    world: Arc<WorldModel>,
    mode: ControlMode,
    trace: &InputTrace,
    config: &SimConfig,
) -> Result<RunRecord, ConfigError> {
    let mut session = Session::new(world, mode, config.clone())?;
    for e in trace.events() {
        session.enqueue_input(Some(e.t), e.joystick());
    }
    session.run_to_end();
    Ok(session.into_record())
}

#[derive(Debug, Clone)]
pub struct RunJob {
    pub world: Arc<WorldModel>,
    pub mode: ControlMode,
    pub trace: InputTrace,
    pub config: SimConfig,
}

/// Independent runs, spread over the pool when `exec` is parallel. Output
/// order follows `jobs`.
pub fn run_batch(jobs: &[RunJob], exec: Parallelism) -> Vec<Result<RunRecord, ConfigError>> {
    map_slice(jobs, exec, |job| run(job.world.clone(), job.mode, &job.trace, &job.config))
}

/// Costmap and path the robot would use at its start pose, optionally with
/// a filter of offset `d` placed along the initial plan.
#[derive(Debug, Clone)]
pub struct PlanScene {
    pub costmap: Costmap,
    pub filter: Option<ActiveFilter>,
    pub initial_path: Result<GlobalPath, PlanError>,
    pub path: Result<GlobalPath, PlanError>,
}

pub fn plan_scene(world: &WorldModel, config: &SimConfig, d: Option<f64>) -> Result<PlanScene, ConfigError> {
    config.validate()?;
    let q = RobotState::new(world.start.x, world.start.y, world.start.theta);
    let mut sensed = SensedObstacles::new(world, config.sensor_range);
    sensed.update(world, q.position());
    let obstacles = obstacle_layer(world, &sensed, config);
    let edge_costs = EdgeCosts::new(config.beta);
    let initial_path = plan_from(&obstacles, &edge_costs, q.position(), world.goal);
    let filter = d.map(|d| place_filter(&q, d, initial_path.as_ref().ok(), config));
    let costmap = compose(&obstacles, filter.as_ref(), config.parallelism);
    let path = plan_from(&costmap, &edge_costs, q.position(), world.goal);
    Ok(PlanScene {
        costmap,
        filter,
        initial_path,
        path,
    })
}
