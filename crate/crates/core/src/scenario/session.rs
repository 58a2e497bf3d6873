use std::collections::VecDeque;
use std::sync::Arc;

use crate::config::{ConfigError, SimConfig};
use crate::controller::{arbitrate, track_path, ControlMode, Joystick, ReleaseDetector, OFFSET_PER_UNIT};
use crate::costmap::{
    build_cost_frame, compose, compute_g_obs, fit_direction, inflate_obstacles, ActiveFilter, Costmap,
    GridSpec, FIT_ARC_LENGTH,
};
use crate::geom::Vec2;
use crate::planner::{closest_point, nearest_free_cell, plan_cells, EdgeCosts, GlobalPath, PlanError};
use crate::sim::{step_kinematics, ControlInput, DelayLine, RobotState, SensedObstacles, SimClock};

use super::record::{summarize, FilterRow, Outcome, RunRecord, Summary, TickRow};
use super::WorldModel;

/// Obstacle layer for the obstacles in `sensed`, with the world border kept
/// out of reach of the robot footprint.
pub fn obstacle_layer(world: &WorldModel, sensed: &SensedObstacles, config: &SimConfig) -> Costmap {
    let spec = GridSpec::covering(&world.bounds, config.resolution);
    let mut mask = inflate_obstacles(world, sensed, config.robot_radius, &spec, config.parallelism);
    mask.mark_border(world.bounds.min, world.bounds.max, config.robot_radius);
    compute_g_obs(&mask, &spec, &config.decay, config.parallelism)
}

/// Plans from `from` to `goal`, starting at the nearest free cell when the
/// robot currently sits on a lethal one.
pub fn plan_from(
    costmap: &Costmap,
    edge_costs: &EdgeCosts,
    from: Vec2,
    goal: Vec2,
) -> Result<GlobalPath, PlanError> {
    let spec = costmap.spec();
    let start = spec.world_to_index(from).ok_or(PlanError::StartOutside(from))?;
    let goal_cell = spec.world_to_index(goal).ok_or(PlanError::GoalOutside(goal))?;
    let start = nearest_free_cell(costmap, start).ok_or(PlanError::StartLethal)?;
    plan_cells(costmap, edge_costs, start, goal_cell)
}

/// Places a filter with offset `d` for a robot at `q` following `path`.
pub fn place_filter(q: &RobotState, d: f64, path: Option<&GlobalPath>, config: &SimConfig) -> ActiveFilter {
    let d = d.clamp(-OFFSET_PER_UNIT, OFFSET_PER_UNIT);
    let dir = match path {
        Some(p) => fit_direction(p, q, FIT_ARC_LENGTH),
        None => q.heading(),
    };
    ActiveFilter {
        d,
        frame: build_cost_frame(q, d, dir),
        params: config.filter,
    }
}

/// Immutable view of a session after its latest tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub row: TickRow,
    pub path: Vec<Vec2>,
    pub filter: Option<ActiveFilter>,
    pub sensed: Vec<String>,
    pub cum_radiation: f64,
    pub outcome: Option<Outcome>,
}

/// One simulated run, advanced tick by tick.
///
/// Each tick: queued inputs whose stamp has come are pushed into the delay
/// line; the delayed joystick is read; sensing updates the obstacle set; a
/// trigger release (shared control) places a new cost filter; the planner
/// runs on schedule or when anything changed; the tracker and arbitration
/// produce the command; metrics are logged; the robot is integrated.
#[derive(Debug, Clone)]
pub struct Session {
    world: Arc<WorldModel>,
    config: SimConfig,
    mode: ControlMode,
    edge_costs: EdgeCosts,
    clock: SimClock,
    pose: RobotState,
    pending: VecDeque<(Option<f64>, Joystick)>,
    delay: DelayLine,
    release: ReleaseDetector,
    sensed: SensedObstacles,
    obstacles: Option<Costmap>,
    costmap: Option<Costmap>,
    filter: Option<ActiveFilter>,
    path: Option<GlobalPath>,
    rows: Vec<TickRow>,
    running_radiation: f64,
    outcome: Option<Outcome>,
}

impl Session {
    pub fn new(world: Arc<WorldModel>, mode: ControlMode, config: SimConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let s = world.start;
        let pose = RobotState::new(s.x, s.y, s.theta);
        let sensed = SensedObstacles::new(&world, config.sensor_range);
        Ok(Self {
            edge_costs: EdgeCosts::new(config.beta),
            clock: SimClock::new(config.dt),
            delay: DelayLine::new(config.latency),
            pose,
            pending: VecDeque::new(),
            release: ReleaseDetector::default(),
            sensed,
            obstacles: None,
            costmap: None,
            filter: None,
            path: None,
            rows: Vec::new(),
            running_radiation: 0.0,
            outcome: None,
            world,
            config,
            mode,
        })
    }

    pub fn world(&self) -> &Arc<WorldModel> {
        &self.world
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn mode(&self) -> ControlMode {
        self.mode
    }

    pub fn tick(&self) -> u64 {
        self.clock.tick()
    }

    pub fn time(&self) -> f64 {
        self.clock.time()
    }

    pub fn pose(&self) -> &RobotState {
        &self.pose
    }

    pub fn path(&self) -> Option<&GlobalPath> {
        self.path.as_ref()
    }

    pub fn filter(&self) -> Option<&ActiveFilter> {
        self.filter.as_ref()
    }

    pub fn rows(&self) -> &[TickRow] {
        &self.rows
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    /// Queues operator input. It enters the delay line at the first tick whose
    /// time is ≥ `stamp` (or at the next tick when unstamped), stamped with
    /// `stamp` itself.
    pub fn enqueue_input(&mut self, stamp: Option<f64>, j: Joystick) {
        self.pending.push_back((stamp, j.sanitized()));
    }

    /// Composed costmap from the latest replan, if any.
    pub fn costmap(&self) -> Option<&Costmap> {
        self.costmap.as_ref()
    }

    /// Composed costmap for current knowledge and filter, computed on demand.
    pub fn current_costmap(&mut self) -> Costmap {
        let obstacles = self.obstacle_costmap().clone();
        compose(&obstacles, self.filter.as_ref(), self.config.parallelism)
    }

    fn obstacle_costmap(&mut self) -> &Costmap {
        if self.obstacles.is_none() {
            self.obstacles = Some(obstacle_layer(&self.world, &self.sensed, &self.config));
        }
        self.obstacles.as_ref().expect("just computed")
    }

    fn replan(&mut self) {
        let goal = self.world.goal;
        let from = self.pose.position();
        let obstacles = self.obstacle_costmap().clone();
        let composed = compose(&obstacles, self.filter.as_ref(), self.config.parallelism);
        self.path = plan_from(&composed, &self.edge_costs, from, goal).ok();
        self.costmap = Some(composed);
    }

    fn ingest_inputs(&mut self, now: f64) {
        while let Some(&(stamp, j)) = self.pending.front() {
            let stamp = stamp.unwrap_or(now);
            if stamp > now {
                break;
            }
            self.pending.pop_front();
            self.delay.push(stamp, j);
        }
    }

    /// Advances one tick and returns its row; `None` once the run has ended.
    pub fn step(&mut self) -> Option<&TickRow> {
        if self.outcome.is_some() {
            return None;
        }
        let now = self.clock.time();
        let tick = self.clock.tick();
        let pos = self.pose.position();

        self.ingest_inputs(now);
        let joy = self.delay.poll(now);

        let mut replan = self.path.is_none() || tick.is_multiple_of(self.config.replan_period_ticks());
        if self.sensed.update(&self.world, pos) {
            self.obstacles = None;
            replan = true;
        }
        if let Some(d) = self.release.observe(self.mode, &joy) {
            self.filter = Some(place_filter(&self.pose, d, self.path.as_ref(), &self.config));
            replan = true;
        }
        if let (Some(f), Some(path)) = (&self.filter, &self.path) {
            let (_, nearest, _) = closest_point(path, pos);
            if (nearest - f.frame.origin).dot(f.frame.y_axis) > f.params.l {
                self.filter = None;
                replan = true;
            }
        }

        let at_goal = pos.distance(self.world.goal) <= self.config.tracker.goal_tolerance;
        let replanned = replan && !at_goal;
        if replanned {
            self.replan();
        }

        let u = if at_goal {
            ControlInput::ZERO
        } else {
            let u_a = match &self.path {
                Some(p) => track_path(&self.pose, p, self.world.goal, &self.config.tracker, &self.config.limits),
                None => ControlInput::ZERO,
            };
            arbitrate(self.mode, &joy, u_a, self.config.omega_mapping, &self.config.limits)
        };

        let radiation = self.config.radiation_metric.sample(&self.world, pos);
        if let Some(prev) = self.rows.last() {
            self.running_radiation += prev.radiation * self.config.dt;
        }
        self.rows.push(TickRow {
            tick,
            t: now,
            x: self.pose.x,
            y: self.pose.y,
            theta: self.pose.theta,
            v: u.v(),
            omega: u.omega(),
            jx: joy.jx,
            jy: joy.jy,
            trigger: joy.trigger,
            mode: self.mode,
            filter: self.filter.as_ref().map(FilterRow::from),
            radiation,
            clearance: self.world.clearance(pos, self.config.robot_radius),
            replanned,
            has_path: self.path.is_some(),
        });

        if at_goal {
            self.outcome = Some(Outcome::Goal);
        } else if now >= self.config.timeout {
            self.outcome = Some(Outcome::Timeout);
        } else {
            self.pose = step_kinematics(&self.pose, u, self.config.dt);
            self.clock.advance();
        }
        self.rows.last()
    }

    /// Steps until the run ends.
    pub fn run_to_end(&mut self) {
        while self.step().is_some() {}
    }

    pub fn snapshot(&self) -> Option<Snapshot> {
        let row = self.rows.last()?.clone();
        Some(Snapshot {
            row,
            path: self.path.as_ref().map(|p| p.points().to_vec()).unwrap_or_default(),
            filter: self.filter,
            sensed: self
                .sensed
                .indices()
                .map(|i| self.world.obstacles[i].id.clone())
                .collect(),
            cum_radiation: self.running_radiation,
            outcome: self.outcome,
        })
    }

    /// Summary of the rows so far. An unfinished run reports `Timeout`.
    pub fn summary(&self) -> Summary {
        summarize(
            &self.rows,
            self.config.dt,
            self.mode,
            self.outcome.unwrap_or(Outcome::Timeout),
        )
    }

    pub fn record(&self) -> RunRecord {
        RunRecord {
            rows: self.rows.clone(),
            summary: self.summary(),
        }
    }

    pub fn into_record(self) -> RunRecord {
        let summary = self.summary();
        RunRecord {
            rows: self.rows,
            summary,
        }
    }
}
