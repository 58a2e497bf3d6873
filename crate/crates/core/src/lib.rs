//! Shared-control navigation for telepresence robots.
//!
//! The robot always plans its own path over a quantized costmap. The operator
//! bends that path by dropping a lateral "cost valley" in front of the robot
//! and by capping its speed; alternatively, in control-switching mode, the
//! operator takes over the wheels directly while a button is held.
//!
//! Module map:
//!
//! - [`sim`]: unicycle integration, local sensing, radiation field, input delay line
//! - [`costmap`]: obstacle inflation and decay, the user-input cost filter, composition
//! - [`planner`]: A* over the composed costmap
//! - [`controller`]: joystick mappings, pure-pursuit tracking, mode arbitration
//! - [`scenario`]: world files, input traces, the tick loop, run records and metrics

pub mod config;
pub mod controller;
pub mod costmap;
pub mod geom;
pub mod par;
pub mod planner;
pub mod scenario;
pub mod sim;

pub use config::SimConfig;
pub use controller::{ControlMode, Joystick};
pub use geom::Vec2;
pub use par::Parallelism;
