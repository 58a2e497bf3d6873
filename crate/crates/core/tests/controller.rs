use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sharenav_core::controller::{
    arbitrate, filter_event, map_user_velocity, omega_limit, speed_cap, track_path, OmegaMapping,
    ReleaseDetector, TrackerParams,
};
use sharenav_core::planner::GlobalPath;
use sharenav_core::sim::{RobotState, VelocityLimits};
use sharenav_core::{ControlMode, Joystick, Vec2};

fn lever_speed(jy: f64) -> f64 {
    if jy > 0.0 { 1.0 + 0.5 * jy } else { 1.0 + jy }
}

fn stick_rate(jx: f64, jy: f64) -> f64 {
    if jy > 0.0 { jx } else { jx * (1.0 + 0.8 * jy) }
}

#[test]
fn arbitration_contracts_hold_on_ten_thousand_random_triples() {
    let limits = VelocityLimits::default();
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..10_000 {
        let mode = if rng.gen_bool(0.5) { ControlMode::SharedControl } else { ControlMode::ControlSwitching };
        // Lever values sometimes sit exactly on the detent or the stops.
        let jy = match rng.gen_range(0..8u32) {
            0 => 0.0,
            1 => -1.0,
            2 => 1.0,
            _ => rng.gen_range(-1.0..1.0),
        };
        let j = Joystick::new(rng.gen_range(-1.0..1.0), jy, rng.gen_bool(0.5));
        let u_a = limits.admit(rng.gen_range(0.0..limits.v_max), rng.gen_range(-limits.omega_max..limits.omega_max)).unwrap();
        let u = arbitrate(mode, &j, u_a, OmegaMapping::Multiplicative, &limits);
        let v_h = lever_speed(j.jy);
        match mode {
            ControlMode::ControlSwitching if j.trigger => {
                assert_eq!((u.v(), u.omega()), (v_h, stick_rate(j.jx, j.jy)), "{j:?}");
            }
            ControlMode::ControlSwitching => {
                assert!(u.v() <= v_h + 1e-9);
                assert_eq!(u.v(), u_a.v().min(v_h));
                assert_eq!(u.omega(), u_a.omega());
            }
            ControlMode::SharedControl => {
                let w = if j.jy > 0.0 { 1.0 } else { 1.0 + 0.8 * j.jy };
                assert!(u.v() <= v_h + 1e-9);
                assert!(u.omega().abs() <= w + 1e-9);
                // Always the tracker's command, capped; never the stick mapping.
                assert_eq!(u.v(), u_a.v().min(v_h));
                assert_eq!(u.omega(), u_a.omega().clamp(-w, w));
            }
        }
        // Pure: same inputs, same output.
        assert_eq!(u, arbitrate(mode, &j, u_a, OmegaMapping::Multiplicative, &limits));
    }
}

#[test]
fn mapping_examples() {
    let m = OmegaMapping::Multiplicative;
    assert_eq!(map_user_velocity(&Joystick::new(0.0, 0.0, false), m).0, 1.0);
    assert_eq!(map_user_velocity(&Joystick::new(0.0, 1.0, false), m).0, 1.5);
    assert_eq!(map_user_velocity(&Joystick::new(0.0, -1.0, false), m).0, 0.0);
    let (_, w) = map_user_velocity(&Joystick::new(0.5, -0.5, false), m);
    assert!((w - 0.3).abs() < 1e-15);
    let (_, w) = map_user_velocity(&Joystick::new(0.5, -0.5, false), OmegaMapping::Additive);
    assert!((w - 0.1).abs() < 1e-15);
    assert_eq!(omega_limit(0.5), 1.0);
    assert!((omega_limit(-0.5) - 0.6).abs() < 1e-15);
    assert_eq!(speed_cap(-1.0), 0.0);
}

#[test]
fn arbitration_examples() {
    let limits = VelocityLimits::default();
    let m = OmegaMapping::Multiplicative;
    let u_a = limits.admit(1.0, 0.4).unwrap();
    let u = arbitrate(ControlMode::ControlSwitching, &Joystick::new(0.5, 0.2, true), u_a, m, &limits);
    assert!((u.v() - 1.1).abs() < 1e-15 && u.omega() == 0.5);
    let u = arbitrate(ControlMode::ControlSwitching, &Joystick::new(0.3, -1.0, false), u_a, m, &limits);
    assert_eq!(u.v(), 0.0);
    let u = arbitrate(ControlMode::SharedControl, &Joystick::new(0.9, 0.0, true), u_a, m, &limits);
    assert_eq!((u.v(), u.omega()), (1.0, 0.4));
}

#[test]
fn release_edges_place_filters_only_in_shared_control() {
    assert_eq!(filter_event(ControlMode::SharedControl, true, &Joystick::new(0.4, 0.0, false)), Some(2.0));
    assert_eq!(filter_event(ControlMode::SharedControl, true, &Joystick::new(-1.0, 0.0, false)), Some(-5.0));
    assert_eq!(filter_event(ControlMode::ControlSwitching, true, &Joystick::new(0.4, 0.0, false)), None);
    let mut det = ReleaseDetector::default();
    let sc = ControlMode::SharedControl;
    for jx in [0.0, 0.2, 0.5, 0.9] {
        assert_eq!(det.observe(sc, &Joystick::new(jx, 0.0, true)), None);
    }
    assert_eq!(det.observe(sc, &Joystick::new(0.9, 0.0, false)), Some(4.5));
    assert_eq!(det.observe(sc, &Joystick::new(0.9, 0.0, false)), None);
}

fn straight_path() -> GlobalPath {
    GlobalPath::from_points((0..=100).map(|i| Vec2::new(i as f64 * 0.1, 0.0)).collect())
}

#[test]
fn tracker_examples() {
    let limits = VelocityLimits::default();
    let params = TrackerParams::default();
    let u = track_path(&RobotState::new(1.0, 0.0, 0.0), &straight_path(), Vec2::new(10.0, 0.0), &params, &limits);
    assert_eq!(u.v(), 1.0);
    assert!(u.omega().abs() < 1e-6);
    let u = track_path(&RobotState::new(9.7, 0.0, 0.0), &straight_path(), Vec2::new(10.0, 0.0), &params, &limits);
    assert_eq!((u.v(), u.omega()), (0.0, 0.0));
}

proptest! {
    #[test]
    fn tracker_follows_the_pure_pursuit_curvature(alpha in -1.5f64..1.5, th in -3.0f64..3.0) {
        let limits = VelocityLimits { v_max: 1.5, omega_max: 10.0 };
        let params = TrackerParams::default();
        let q = RobotState::new(0.0, 0.0, th);
        // Two-vertex path: the robot's own cell, then the target at exactly L_d.
        let target = Vec2::from_angle(th + alpha) * params.lookahead;
        let path = GlobalPath::from_points(vec![Vec2::new(0.0, 0.0), target, target * 20.0]);
        let u = track_path(&q, &path, target * 20.0, &params, &limits);
        let expect = 2.0 * params.cruise * alpha.sin() / params.lookahead;
        prop_assert!((u.v() - params.cruise).abs() < 1e-12);
        prop_assert!((u.omega() - expect).abs() < 1e-9, "{} vs {}", u.omega(), expect);
    }
}
