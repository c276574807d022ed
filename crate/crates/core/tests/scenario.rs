use std::time::Duration;

use pedsim::io::{write_log, EventKind, ObstacleSpec, PedestrianCounts, RunOutcome, ScenarioSpec, TriggerSpec};
use pedsim::scenario::geometry::{obb_circle, obb_obb, rotate, Circle, Obb, Vec2};
use pedsim::scenario::{
    reroute, run, ClipLibrary, ConstantSpeed, Control, Observation, PedPhase, Planner, PlannerError, ReactiveBrake,
    RerouteOutcome, Simulation, StdioPlanner, DEFAULT_TICK, REROUTE_OFFSETS_DEG,
};
use pedsim::synth::{crossing_scene, straight_clip, synthetic_scenarios, CROSSING_EGO_SPEED, CROSSING_PED_SPEED};
use proptest::prelude::*;

fn empty_route() -> (ScenarioSpec, ClipLibrary) {
    let (mut spec, clips) = crossing_scene();
    spec.route = vec![[0.0, 0.0], [100.0, 0.0]];
    spec.ego.initial_speed = 10.0;
    spec.pedestrians.clear();
    spec.pedestrian_counts = PedestrianCounts::default();
    (spec, clips)
}

#[test]
fn empty_route_completes_on_time() {
    let (spec, clips) = empty_route();
    let log = run(&spec, &clips, &mut ConstantSpeed, DEFAULT_TICK).unwrap();
    assert_eq!(log.summary.outcome, RunOutcome::Completed);
    assert!((log.summary.t_end - 10.0).abs() <= DEFAULT_TICK + 1e-9, "{}", log.summary.t_end);
    let kinds: Vec<_> = log.events.iter().map(|e| e.kind).collect();
    assert_eq!(kinds, vec![EventKind::RunStart, EventKind::RunEnd]);
    assert!((log.summary.distance_m - 100.0).abs() < 1e-9);
}

#[test]
fn crossing_collision_matches_analytic_speed() {
    let (spec, clips) = crossing_scene();
    let log = run(&spec, &clips, &mut ConstantSpeed, DEFAULT_TICK).unwrap();
    let hits: Vec<_> = log.events_of(EventKind::Collision).collect();
    assert_eq!(hits.len(), 1);
    // Perpendicular constant velocities: |v_ego - v_ped| = hypot(8, 1.4).
    let analytic = CROSSING_EGO_SPEED.hypot(CROSSING_PED_SPEED);
    assert!((hits[0].impact_speed.unwrap() - analytic).abs() < 1e-6);
    assert_eq!(hits[0].agents, vec!["ego".to_string(), "p0".to_string()]);
    // Ego front reaches the pedestrian's near edge at x = 29.7.
    let contact_tick = ((29.7 - 2.25) / (CROSSING_EGO_SPEED * DEFAULT_TICK)).ceil();
    assert!((hits[0].t - contact_tick * DEFAULT_TICK).abs() < 1e-9);
}

#[test]
fn reactive_brake_avoids_crossing_pedestrian() {
    let (spec, clips) = crossing_scene();
    let log = run(&spec, &clips, &mut ReactiveBrake::default(), DEFAULT_TICK).unwrap();
    assert_eq!(log.events_of(EventKind::Collision).count(), 0);
    assert!(log.events_of(EventKind::BrakeStart).count() >= 1);
    assert!(!log.predictions.is_empty());
    assert_eq!(log.summary.outcome, RunOutcome::Completed);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let (spec, clips) = crossing_scene();
    let a = write_log(&run(&spec, &clips, &mut ReactiveBrake::default(), DEFAULT_TICK).unwrap()).unwrap();
    let b = write_log(&run(&spec, &clips, &mut ReactiveBrake::default(), DEFAULT_TICK).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_clip_is_reported() {
    let (spec, _) = crossing_scene();
    let err = run(&spec, &ClipLibrary::new(), &mut ConstantSpeed, DEFAULT_TICK).unwrap_err();
    assert_eq!(err.code(), "missing_clip");
}

struct Sleepy;

impl Planner for Sleepy {
    fn name(&self) -> &str {
        "sleepy"
    }

    fn observe(&mut self, _obs: &Observation) -> Result<Control, PlannerError> {
        std::thread::sleep(Duration::from_millis(30));
        Ok(Control::default())
    }
}

#[test]
fn slow_planner_aborts_run() {
    let (mut spec, clips) = crossing_scene();
    spec.settings.tick_budget_ms = 5.0;
    let log = run(&spec, &clips, &mut Sleepy, DEFAULT_TICK).unwrap();
    assert_eq!(log.summary.outcome, RunOutcome::Aborted);
    assert_eq!(log.events_of(EventKind::PlannerTimeout).count(), 1);
    assert_eq!(log.events.last().unwrap().kind, EventKind::RunEnd);
}

#[test]
fn stdio_planner_drives_the_ego() {
    let (spec, clips) = crossing_scene();
    let script = r#"while read line; do echo '{"accel": 0.0, "brake_signal": 0.0}'; done"#;
    let mut planner = StdioPlanner::spawn("sh-constant", "sh", &["-c".into(), script.into()], 2000.0).unwrap();
    let log = run(&spec, &clips, &mut planner, DEFAULT_TICK).unwrap();
    let reference = run(&spec, &clips, &mut ConstantSpeed, DEFAULT_TICK).unwrap();
    assert_eq!(log.header.planner, "sh-constant");
    assert_eq!(log.events, reference.events);
    assert_eq!(log.tracks, reference.tracks);
}

fn enclosure() -> Vec<ObstacleSpec> {
    let wall = |id: &str, c: [f64; 2], l: f64, w: f64| ObstacleSpec { id: id.into(), center: c, length: l, width: w, yaw: 0.0 };
    vec![
        wall("n", [30.0, -1.8], 3.0, 0.2),
        wall("s", [30.0, -4.2], 3.0, 0.2),
        wall("e", [31.2, -3.0], 0.2, 3.0),
        wall("w", [28.8, -3.0], 0.2, 3.0),
    ]
}

#[test]
fn enclosed_pedestrian_halts() {
    let (mut spec, clips) = crossing_scene();
    spec.obstacles = enclosure();
    spec.pedestrians[0].trigger = TriggerSpec::Time { at_s: 0.0 };
    let mut sim = Simulation::new(&spec, &clips, DEFAULT_TICK, "constant_speed").unwrap();
    let mut planner = ConstantSpeed;
    while sim.step(&mut planner).unwrap() {}
    let ped = &sim.pedestrians()[0];
    assert!(ped.halted);
    assert!(matches!(ped.phase, PedPhase::Active { .. }));
    assert_eq!(ped.position, Vec2::new(30.0, -3.0));
    let log = sim.finish();
    assert_eq!(log.events_of(EventKind::RerouteFailed).count(), 1);
}

/// Point-sampling checker: any of `n`×`n` grid points of `a` inside `b`, or vice versa.
fn sampled_overlap(a: &Obb, b: &Obb, n: usize) -> bool {
    fn grid(o: Obb, n: usize) -> impl Iterator<Item = Vec2> {
        let [u, v] = o.axes();
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| {
                let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let t = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                o.center + u * (s * o.half.x) + v * (t * o.half.y)
            })
        })
    }
    grid(*a, n).any(|p| b.contains(p, 1e-9)) || grid(*b, n).any(|p| a.contains(p, 1e-9))
}

fn resized(o: &Obb, d: f64) -> Obb {
    Obb { half: o.half.add_scalar(d), ..*o }
}

#[test]
fn corner_touching_boxes_match_sampling() {
    let a = Obb::new(Vec2::zeros(), 2.0, 2.0, 0.0);
    let r = std::f64::consts::FRAC_PI_4;
    let diamond = Obb::new(Vec2::new(1.0 + 0.5 * 2f64.sqrt(), 0.0), 1.0, 1.0, r);
    assert_eq!(obb_obb(&a, &diamond), sampled_overlap(&a, &diamond, 100));
    let apart = Obb { center: diamond.center + Vec2::new(0.01, 0.0), ..diamond };
    assert_eq!(obb_obb(&a, &apart), sampled_overlap(&a, &apart, 100));
    assert!(obb_obb(&a, &diamond) && !obb_obb(&a, &apart));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sat_matches_dense_sampling(
        ax in -3.0..3.0f64, ay in -3.0..3.0f64, ayaw in 0.0..3.2f64, al in 0.5..3.0f64, aw in 0.5..3.0f64,
        byaw in 0.0..3.2f64, bl in 0.5..3.0f64, bw in 0.5..3.0f64,
    ) {
        let a = Obb::new(Vec2::new(ax, ay), al, aw, ayaw);
        let b = Obb::new(Vec2::zeros(), bl, bw, byaw);
        let (inner, outer) = (sampled_overlap(&a, &resized(&b, -0.05), 100), sampled_overlap(&a, &resized(&b, 0.05), 100));
        prop_assume!(inner == outer);
        prop_assert_eq!(obb_obb(&a, &b), inner);
    }

    #[test]
    fn circle_box_matches_distance_sampling(
        cx in -3.0..3.0f64, cy in -3.0..3.0f64, r in 0.1..1.5f64, yaw in 0.0..3.2f64, l in 0.5..3.0f64, w in 0.5..3.0f64,
    ) {
        let b = Obb::new(Vec2::zeros(), l, w, yaw);
        let c = Vec2::new(cx, cy);
        let [u, v] = b.axes();
        let n = 100;
        let dmin = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
            let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let t = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            (b.center + u * (s * b.half.x) + v * (t * b.half.y) - c).norm()
        }).fold(f64::INFINITY, f64::min);
        prop_assume!((dmin - r).abs() > 0.05);
        prop_assert_eq!(obb_circle(&b, &Circle { center: c, radius: r }), dmin < r);
    }
}

fn oracle_clear(path: &[Vec2], r: f64, walls: &[(String, Obb)]) -> bool {
    path.iter().all(|c| {
        walls.iter().all(|(_, o)| {
            let [u, v] = o.axes();
            let n = 60;
            (0..n).all(|i| {
                (0..n).all(|j| {
                    let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                    let t = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                    (o.center + u * (s * o.half.x) + v * (t * o.half.y) - c).norm() > r
                })
            })
        })
    })
}

#[test]
fn wall_ahead_picks_first_clear_offset() {
    let path: Vec<Vec2> = (0..40).map(|i| Vec2::new(0.2 * i as f64, 0.0)).collect();
    let walls = vec![("wall".to_string(), Obb::new(Vec2::new(3.3, 0.0), 0.2, 1.0, 0.0))];
    let expected = REROUTE_OFFSETS_DEG
        .into_iter()
        .find(|deg| {
            let cand: Vec<Vec2> = path.iter().map(|p| rotate(*p, deg.to_radians())).collect();
            oracle_clear(&cand[1..], 0.3, &walls)
        })
        .unwrap();
    assert_eq!(expected, 15.0);
    match reroute(&path, 0.3, &walls, 20) {
        RerouteOutcome::Rerouted { offset_deg, path: p } => {
            assert_eq!(offset_deg, expected);
            assert_eq!(p[0], path[0]);
        }
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_invariants(seed in any::<u64>()) {
        let clips = ClipLibrary::from([
            ("walk".to_string(), straight_clip("walk", 1.4, 120, 3)),
            ("idle".to_string(), straight_clip("idle", 0.0, 40, 3)),
        ]);
        for spec in synthetic_scenarios(2, seed, &["walk".into()], &["idle".into()]) {
            let mut sim = Simulation::new(&spec, &clips, DEFAULT_TICK, "reactive_brake").unwrap();
            let mut planner = ReactiveBrake::default();
            let mut ranks: Vec<u8> = sim.pedestrians().iter().map(|p| p.phase.rank()).collect();
            while sim.step(&mut planner).unwrap() {
                let fp = sim.ego().footprint();
                for (k, p) in sim.pedestrians().iter().enumerate() {
                    prop_assert!(p.phase.rank() >= ranks[k]);
                    ranks[k] = p.phase.rank();
                    if obb_circle(&fp, &p.footprint()) {
                        prop_assert!(sim.events().iter().any(|e| e.kind == EventKind::Collision && e.agents[1] == p.spec.id && e.t <= sim.time() + 1e-9));
                    }
                    let spawn = Vec2::new(p.spec.spawn.x, p.spec.spawn.y);
                    let frames = &clips[&p.spec.clip].frames;
                    prop_assert_eq!(p.path.len(), frames.len());
                    for (f, pos) in p.path.iter().enumerate() {
                        let d = frames[f].root_position - frames[0].root_position;
                        if !p.rerouted[f] {
                            prop_assert!((pos - (spawn + rotate(Vec2::new(d.x, -d.y), p.spec.spawn.yaw))).norm() < 1e-9);
                        }
                    }
                }
            }
            let log = sim.finish();
            prop_assert!(log.validate().is_ok());
            prop_assert!(log.events.windows(2).all(|w| w[0].t <= w[1].t));
        }
    }
}
