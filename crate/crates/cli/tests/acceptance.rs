//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod support;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sharenav_core::controller::{arbitrate, OmegaMapping};
use sharenav_core::costmap::{
    build_cost_frame, compose, f_lat, f_lon, parse_csv, ActiveFilter, CostFilterParams, Costmap, GridSpec, LETHAL,
};
use sharenav_core::planner::{plan_cells, EdgeCosts, PlanError};
use sharenav_core::scenario::{plan_scene, run, Bounds, Outcome, Pose, RunRecord, Session, WorldModel};
use sharenav_core::sim::{RobotState, VelocityLimits};
use sharenav_core::{ControlMode, Joystick, Parallelism, SimConfig, Vec2};
use support::{served_run, trace, world};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

const WORLDS: [&str; 4] = ["open", "corridor", "plaza", "forest"];

fn bundled_runs() -> Vec<(&'static str, &'static str, ControlMode)> {
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
    let mut runs: Vec<_> = WORLDS
        .iter()
        .flat_map(|w| per_world.iter().map(move |&(t, m)| (*w, t, m)))
        .collect();
    runs.push(("open", "stop_lever", Cs));
    runs
}

// Planner oracle equivalence

fn dijkstra(cm: &Costmap, beta: f64, start: usize, goal: usize) -> Option<u64> {
    let s = cm.spec();
    let (w, h) = (s.width as i64, s.height as i64);
    let blocked = |x: i64, y: i64| cm.get(x as usize, y as usize) == LETHAL;
    let mut dist = vec![u64::MAX; s.len()];
    let mut heap = BinaryHeap::from([Reverse((0u64, start))]);
    dist[start] = 0;
    while let Some(Reverse((d, c))) = heap.pop() {
        if c == goal {
            return Some(d);
        }
        if d > dist[c] {
            continue;
        }
        let (x, y) = ((c % s.width) as i64, (c / s.width) as i64);
        for (dx, dy) in (-1..=1).flat_map(|dx| (-1..=1).map(move |dy| (dx, dy))) {
            let (nx, ny) = (x + dx, y + dy);
            if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w || ny >= h || blocked(nx, ny) {
                continue;
            }
            let diag = dx != 0 && dy != 0;
            if diag && (blocked(nx, y) || blocked(x, ny)) {
                continue;
            }
            let base = 1000.0 * (255.0 + beta * f64::from(cm.get(nx as usize, ny as usize)));
            let step = if diag { base * std::f64::consts::SQRT_2 } else { base }.round() as u64;
            let n = (ny * w + nx) as usize;
            if d + step < dist[n] {
                dist[n] = d + step;
                heap.push(Reverse((d + step, n)));
            }
        }
    }
    None
}

fn random_costmap(rng: &mut StdRng) -> Costmap {
    let spec = GridSpec::new(Vec2::new(0.0, 0.0), 0.1, 50, 50);
    let mut cells: Vec<u8> = (0..spec.len()).map(|_| rng.gen_range(0..=254)).collect();
    for _ in 0..rng.gen_range(0..10) {
        let (x0, y0, len) = (rng.gen_range(0..50), rng.gen_range(0..50), rng.gen_range(5..40));
        let horizontal = rng.gen_bool(0.5);
        for k in 0..len {
            let (x, y) = if horizontal { (x0 + k, y0) } else { (x0, y0 + k) };
            if x < 50 && y < 50 {
                cells[spec.index(x, y)] = LETHAL;
            }
        }
    }
    for c in cells.iter_mut() {
        if rng.gen_bool(0.08) {
            *c = LETHAL;
        }
    }
    Costmap::new(spec, cells)
}

fn planner_oracle_equivalence() -> Verdict {
    let beta = SimConfig::default().beta;
    let edges = EdgeCosts::new(beta);
    let mut rng = StdRng::seed_from_u64(0xacce);
    let (mut solved, mut slowest) = (0, Duration::ZERO);
    for i in 0..100 {
        let cm = random_costmap(&mut rng);
        let free: Vec<usize> = (0..cm.spec().len()).filter(|&c| cm.at(c) != LETHAL).collect();
        let (a, b) = (free[rng.gen_range(0..free.len())], free[rng.gen_range(0..free.len())]);
        let t0 = Instant::now();
        let got = plan_cells(&cm, &edges, a, b);
        slowest = slowest.max(t0.elapsed());
        match (got, dijkstra(&cm, beta, a, b)) {
            (Ok(path), Some(cost)) => {
                ensure!(path.total_cost() == Some(cost), "map {i}: planner {:?} vs oracle {cost}", path.total_cost());
                solved += 1;
            }
            (Err(PlanError::NoPath), None) => {}
            (got, want) => return Err(format!("map {i}: planner {got:?} vs oracle {want:?}")),
        }
    }
    ensure!(slowest < Duration::from_millis(50), "slowest plan {slowest:?}");
    Ok(format!("100 maps, {solved} solvable, all costs equal; slowest plan {slowest:.1?}"))
}

// Valley steering

fn valley_steering() -> Verdict {
    let world = world("open");
    ensure!((world.goal - world.start.position()).norm() >= 24.9, "goal is not 25 m ahead");
    let config = SimConfig {
        filter: CostFilterParams {
            w: 3.0,
            l: 5.0,
            s: 100,
            p: 1.2,
        },
        ..Default::default()
    };
    let right = Vec2::from_angle(world.start.theta).rotate_cw();
    let mut offsets = Vec::new();
    for d in [0.0, 1.25, 2.5, 3.75] {
        let scene = plan_scene(&world, &config, Some(d)).map_err(|e| e.to_string())?;
        let filter = scene.filter.ok_or("no filter placed")?;
        let path = scene.path.map_err(|e| format!("d={d}: {e}"))?;
        let band: Vec<f64> = path
            .points()
            .iter()
            .filter(|p| (0.0..=filter.params.l).contains(&filter.frame.to_local(**p).1))
            .map(|p| (*p - world.start.position()).dot(right))
            .collect();
        ensure!(!band.is_empty(), "d={d}: path never crosses the valley band");
        offsets.push(band.iter().sum::<f64>() / band.len() as f64);
    }
    let shown = format!("{:.3?}", offsets);
    ensure!(offsets[0].abs() <= 0.1, "d=0 offset {} > 0.1; {shown}", offsets[0]);
    ensure!(offsets[1..].iter().all(|&o| o > 0.0), "non-positive offset; {shown}");
    ensure!(offsets.windows(2).all(|w| w[1] >= w[0]), "offsets decrease; {shown}");
    Ok(format!("mean offsets for d = 0/1.25/2.5/3.75: {shown}"))
}

// Costmap numerics

fn costmap_numerics() -> Verdict {
    let lon = f_lon(5.0, 5.0);
    ensure!((lon - 0.5).abs() <= 1e-9, "f_lon(l) = {lon}");
    let lat = f_lat(0.0, 3.0, 1.0, 1.0);
    ensure!((lat - 0.9640).abs() <= 5e-4, "f_lat(0; p=1) = {lat}");
    // Composed maps from every bundled world, read back through the text dump.
    let mut cells = 0usize;
    for name in WORLDS {
        let w = world(name);
        let scene = plan_scene(&w, &SimConfig::default(), Some(2.5)).map_err(|e| e.to_string())?;
        for field in scene.costmap.to_csv().lines().flat_map(|l| l.split(',')) {
            let v: u32 = field.trim().parse().map_err(|_| format!("{name}: non-integer cell `{field}`"))?;
            ensure!(v <= 255, "{name}: cell {v}");
            cells += 1;
        }
        let back = parse_csv(&scene.costmap.header(), &scene.costmap.to_csv()).map_err(|e| e.to_string())?;
        ensure!(back == scene.costmap, "{name}: dump does not round-trip");
    }
    // Saturation over lethal and near-lethal cells, full-strength filter.
    let spec = GridSpec::new(Vec2::new(0.0, 0.0), 0.1, 40, 40);
    let mut rng = StdRng::seed_from_u64(255);
    let base: Vec<u8> = (0..spec.len())
        .map(|_| if rng.gen_bool(0.3) { LETHAL } else { rng.gen_range(150..=254) })
        .collect();
    let g_obs = Costmap::new(spec, base.clone());
    let q = RobotState::new(2.0, 0.5, std::f64::consts::FRAC_PI_2);
    let filter = ActiveFilter {
        d: 1.0,
        frame: build_cost_frame(&q, 1.0, Vec2::new(0.0, 1.0)),
        params: CostFilterParams {
            s: 255,
            ..Default::default()
        },
    };
    let out = compose(&g_obs, Some(&filter), Parallelism::Parallel);
    let mut saturated = 0;
    for (i, &b) in base.iter().enumerate() {
        let g_ui = u32::from(filter.g_ui(spec.center_of(i)));
        let want = if b == LETHAL { 255 } else { (u32::from(b) + g_ui).min(255) };
        ensure!(u32::from(out.at(i)) == want, "cell {i}: {} vs {want}", out.at(i));
        saturated += usize::from(b != LETHAL && u32::from(b) + g_ui > 255);
    }
    ensure!(saturated > 0, "saturation case never exercised");
    Ok(format!(
        "f_lon(l) = {lon:.12}, f_lat(0) = {lat:.6}; {cells} dumped cells in [0, 255]; {saturated} saturated cells clamp to 255"
    ))
}

// Delay exactness

fn delay_exactness() -> Verdict {
    let cfg = SimConfig::default();
    ensure!(cfg.latency == 1.0 && cfg.dt == 0.05, "defaults moved: latency {} dt {}", cfg.latency, cfg.dt);
    let strip = Arc::new(WorldModel {
        bounds: Bounds::new(Vec2::new(0.0, 0.0), Vec2::new(70.0, 8.0)),
        start: Pose::new(2.0, 4.0, 0.0),
        goal: Vec2::new(68.0, 4.0),
        obstacles: vec![],
        pools: vec![],
    });
    let mut rng = StdRng::seed_from_u64(100);
    let mut session = Session::new(strip, ControlMode::SharedControl, cfg.clone()).map_err(|e| e.to_string())?;
    let mut t = 0.0;
    let mut events = Vec::new();
    for _ in 0..100 {
        t += rng.gen_range(0.1..0.35);
        // Distinct values so each event's first appearance is unambiguous.
        let j = Joystick::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..1.0), rng.gen_bool(0.5));
        session.enqueue_input(Some(t), j);
        events.push((t, j));
    }
    while session.time() <= t + cfg.latency + 0.5 && session.step().is_some() {}
    ensure!(!session.is_done(), "run ended before every event matured");
    for (t, j) in &events {
        let expected = ((t + 1.0) / 0.05).ceil() as u64;
        let first = session
            .rows()
            .iter()
            .find(|r| r.jx == j.jx && r.jy == j.jy && r.trigger == j.trigger)
            .map(|r| r.tick);
        ensure!(first == Some(expected), "event at t={t}: first tick {first:?}, expected {expected}");
    }
    Ok("100 random events, every first-effect tick = ceil((t + 1.0) / dt)".into())
}

// Arbitration contracts

fn lever_speed(jy: f64) -> f64 {
    if jy > 0.0 { 1.0 + 0.5 * jy } else { 1.0 + jy }
}

fn stick_rate(jx: f64, jy: f64) -> f64 {
    if jy > 0.0 { jx } else { jx * (1.0 + 0.8 * jy) }
}

fn same_trajectory(a: &RunRecord, b: &RunRecord) -> bool {
    a.rows.len() == b.rows.len()
        && a.rows.iter().zip(&b.rows).all(|(p, q)| {
            (p.tick, p.x, p.y, p.theta, p.v, p.omega) == (q.tick, q.x, q.y, q.theta, q.v, q.omega)
        })
}

fn arbitration_contracts() -> Verdict {
    let limits = VelocityLimits::default();
    let mut rng = StdRng::seed_from_u64(10_000);
    let mut counts = [0usize; 3];
    for i in 0..10_000 {
        let mode = if rng.gen_bool(0.5) { ControlMode::SharedControl } else { ControlMode::ControlSwitching };
        let jy = match rng.gen_range(0..8) {
            0 => 0.0,
            1 => -1.0,
            2 => 1.0,
            _ => rng.gen_range(-1.0..=1.0),
        };
        let j = Joystick::new(rng.gen_range(-1.0..=1.0), jy, rng.gen_bool(0.5));
        let u_a = limits
            .admit(rng.gen_range(0.0..=limits.v_max), rng.gen_range(-limits.omega_max..=limits.omega_max))
            .map_err(|e| e.to_string())?;
        let u = arbitrate(mode, &j, u_a, OmegaMapping::Multiplicative, &limits);
        let v_h = lever_speed(j.jy);
        match mode {
            ControlMode::ControlSwitching if j.trigger => {
                ensure!(
                    (u.v(), u.omega()) == (v_h, stick_rate(j.jx, j.jy)),
                    "triple {i}: CS+trigger {j:?} gave ({}, {})",
                    u.v(),
                    u.omega()
                );
                counts[0] += 1;
            }
            ControlMode::ControlSwitching => {
                ensure!(u.v() <= v_h, "triple {i}: CS autonomous v {} > {v_h}", u.v());
                counts[1] += 1;
            }
            ControlMode::SharedControl => {
                let limit = if j.jy > 0.0 { 1.0 } else { 1.0 + 0.8 * j.jy };
                ensure!(u.v() <= v_h, "triple {i}: SC v {} > {v_h}", u.v());
                ensure!(u.omega().abs() <= limit, "triple {i}: SC |omega| {} > {limit}", u.omega());
                counts[2] += 1;
            }
        }
    }
    let null = trace("null");
    for name in WORLDS {
        let w = world(name);
        let sc = run(w.clone(), ControlMode::SharedControl, &null, &SimConfig::default()).map_err(|e| e.to_string())?;
        let cs = run(w, ControlMode::ControlSwitching, &null, &SimConfig::default()).map_err(|e| e.to_string())?;
        ensure!(same_trajectory(&sc, &cs), "{name}: null-trace SC and CS trajectories differ");
    }
    Ok(format!(
        "10^4 triples ({} CS+trigger, {} CS autonomous, {} SC); null-trace SC = CS on {} worlds",
        counts[0],
        counts[1],
        counts[2],
        WORLDS.len()
    ))
}

// Safety

fn checked_run(w: &str, t: &str, mode: ControlMode) -> Result<RunRecord, String> {
    let mut session = Session::new(world(w), mode, SimConfig::default()).map_err(|e| e.to_string())?;
    for e in trace(t).events() {
        session.enqueue_input(Some(e.t), e.joystick());
    }
    let mut plans = 0;
    while let Some(row) = session.step() {
        if row.replanned {
            let (path, cm) = (session.path(), session.costmap());
            if let (Some(path), Some(cm)) = (path, cm) {
                plans += 1;
                if let Some(&c) = path.cells().iter().find(|&&c| cm.at(c) == LETHAL) {
                    return Err(format!("{w}/{t}: lethal path vertex {c} at tick {}", session.tick()));
                }
            }
        }
    }
    if plans == 0 {
        return Err(format!("{w}/{t}: never planned"));
    }
    Ok(session.into_record())
}

fn safety() -> Verdict {
    let runs = bundled_runs();
    ensure!(runs.len() >= 20, "only {} bundled runs", runs.len());
    let mut worst = f64::INFINITY;
    for (w, t, m) in &runs {
        let rec = checked_run(w, t, *m)?;
        let s = &rec.summary;
        if let Some(c) = s.min_clearance {
            ensure!(c >= 0.0, "{w}/{t}/{m}: min clearance {c}");
            worst = worst.min(c);
        }
        let want = if *t == "stop_lever" { Outcome::Timeout } else { Outcome::Goal };
        ensure!(s.outcome == want, "{w}/{t}/{m}: {:?} at {:.2} s", s.outcome, s.completion_time);
        ensure!(s.completion_time <= 600.0, "{w}/{t}/{m}: ran {} s", s.completion_time);
    }
    Ok(format!(
        "{} runs; min clearance {worst:.3} m; no lethal path vertex; all reach the goal except the stop lever",
        runs.len()
    ))
}

// Determinism

fn determinism() -> Verdict {
    let cfg = SimConfig::default();
    let runs = bundled_runs();
    for (w, t, m) in &runs {
        let (world, trace) = (world(w), trace(t));
        let a = run(world.clone(), *m, &trace, &cfg).map_err(|e| e.to_string())?.to_jsonl();
        let b = run(world, *m, &trace, &cfg).map_err(|e| e.to_string())?.to_jsonl();
        ensure!(a == b, "{w}/{t}/{m}: repeated runs differ");
    }
    let served = [
        ("open", "sc_offset_right", ControlMode::SharedControl),
        ("plaza", "sc_offset_left", ControlMode::SharedControl),
        ("forest", "cs_nudge", ControlMode::ControlSwitching),
        ("corridor", "cs_slow", ControlMode::ControlSwitching),
    ];
    for (w, t, m) in served {
        let (world, trace) = (world(w), trace(t));
        let headless = run(world.clone(), m, &trace, &cfg).map_err(|e| e.to_string())?;
        let live = served_run(world, m, &trace, &cfg);
        ensure!(same_trajectory(&headless, &live), "{w}/{t}/{m}: served trajectory differs");
        ensure!(headless.to_jsonl() == live.to_jsonl(), "{w}/{t}/{m}: served record differs");
    }
    Ok(format!(
        "{} runs byte-identical on repeat; {} served runs identical to headless",
        runs.len(),
        served.len()
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("planner oracle equivalence", planner_oracle_equivalence),
        ("valley steering", valley_steering),
        ("costmap numerics", costmap_numerics),
        ("delay exactness", delay_exactness),
        ("arbitration contracts", arbitration_contracts),
        ("safety", safety),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t0 = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {name} ({secs:.1} s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
