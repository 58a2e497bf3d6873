#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use sharenav_core::scenario::{load_world, InputTrace, RunJob, WorldModel};
use sharenav_core::{ControlMode, SimConfig};

pub const WORLDS: [&str; 4] = ["open", "corridor", "plaza", "forest"];

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn world(name: &str) -> Arc<WorldModel> {
    let text = std::fs::read_to_string(fixture(&format!("worlds/{name}.world"))).unwrap();
    Arc::new(load_world(&text).unwrap())
}

pub fn trace(name: &str) -> InputTrace {
    let text = std::fs::read_to_string(fixture(&format!("traces/{name}.trace"))).unwrap();
    InputTrace::from_jsonl(&text).unwrap()
}

/// (world, trace, mode) triples; every one but the stop-lever run should reach the goal.
pub fn bundled_runs() -> Vec<(&'static str, &'static str, ControlMode)> {
    use ControlMode::{ControlSwitching as Cs, SharedControl as Sc};
    let per_world = [
        ("null", Sc),
        ("null", Cs),
        ("sc_offset_right", Sc),
        ("sc_offset_left", Sc),
        ("sc_speed", Sc),
        ("cs_nudge", Cs),
        ("cs_slow", Cs),
    ];
    let mut runs = Vec::new();
    for w in WORLDS {
        for (t, m) in per_world {
            runs.push((w, t, m));
        }
    }
    runs.push(("open", "stop_lever", Cs));
    runs
}

pub fn job(world_name: &str, trace_name: &str, mode: ControlMode, config: &SimConfig) -> RunJob {
    RunJob {
        world: world(world_name),
        mode,
        trace: trace(trace_name),
        config: config.clone(),
    }
}
