use pedsim::io::{
    Event, EventKind, LogHeader, LogSummary, PredictionRecord, RunOutcome, ScenarioLog, ScenarioSpec, TrackSample,
};
use pedsim::metrics::{ade, collisions_per_km, fpbr, p_mais3, read_report, report, write_report};
use pedsim::synth::crossing_scene;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn log(id: &str, distance_m: f64, events: Vec<Event>) -> ScenarioLog {
    let t_end = events.iter().map(|e| e.t).fold(0.0, f64::max);
    ScenarioLog {
        header: LogHeader { scenario_id: id.into(), seed: 1, tick: 0.05, planner: "p".into() },
        events,
        tracks: vec![],
        predictions: vec![],
        summary: LogSummary { t_end, ticks: (t_end / 0.05) as u64, distance_m, outcome: RunOutcome::Completed },
    }
}

fn ev(t: f64, kind: EventKind, who: &str) -> Event {
    Event::new(t, kind, vec![who.into()])
}

fn hit(t: f64, v: f64) -> Event {
    let mut e = Event::new(t, EventKind::Collision, vec!["ego".into(), "p0".into()]);
    e.impact_speed = Some(v);
    e
}

fn spec(id: &str) -> ScenarioSpec {
    let mut s = crossing_scene().0;
    s.id = id.into();
    s
}

fn braking(starts: &[f64]) -> Vec<Event> {
    starts
        .iter()
        .flat_map(|t| [ev(*t, EventKind::BrakeStart, "ego"), ev(t + 0.5, EventKind::BrakeEnd, "ego")])
        .collect()
}

fn sorted(mut events: Vec<Event>) -> Vec<Event> {
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    events
}

#[test]
fn fpbr_two_of_three() {
    let mut events = braking(&[2.0, 10.0, 20.0]);
    events.push(ev(11.0, EventKind::CrossingEnter, "p0"));
    events.push(ev(12.0, EventKind::CrossingExit, "p0"));
    assert_eq!(fpbr(&log("s", 100.0, sorted(events))), 2.0 / 3.0);
}

#[test]
fn fpbr_without_braking_is_zero() {
    assert_eq!(fpbr(&log("s", 100.0, vec![ev(1.0, EventKind::CrossingEnter, "p0")])), 0.0);
}

#[test]
fn fpbr_window_is_closed() {
    let mut events = braking(&[5.0]);
    events.push(ev(8.0, EventKind::CrossingEnter, "p0"));
    events.push(ev(9.0, EventKind::CrossingExit, "p0"));
    assert_eq!(fpbr(&log("s", 100.0, sorted(events))), 0.0);
    let mut events = braking(&[5.0]);
    events.push(ev(2.0, EventKind::CrossingEnter, "p0"));
    events.push(ev(4.0, EventKind::CrossingExit, "p0"));
    assert_eq!(fpbr(&log("s", 100.0, sorted(events))), 0.0);
    let mut events = braking(&[5.0]);
    events.push(ev(8.0 + 1e-6, EventKind::CrossingEnter, "p0"));
    assert_eq!(fpbr(&log("s", 100.0, sorted(events))), 1.0);
}

#[test]
fn collision_rate() {
    let l = log("s", 500.0, vec![hit(1.0, 3.0), hit(2.0, 5.0)]);
    assert_eq!(collisions_per_km(&l, 0.5).unwrap(), 4.0);
    assert_eq!(collisions_per_km(&log("s", 500.0, vec![]), 3.7).unwrap(), 0.0);
    assert_eq!(collisions_per_km(&l, 0.0).unwrap_err().code(), "zero_distance");
}

fn tracked(peds: &[(&str, [f64; 2])], ticks: u64) -> Vec<TrackSample> {
    (0..=ticks)
        .flat_map(|k| {
            peds.iter().map(move |(id, v)| TrackSample {
                tick: k,
                t: k as f64 * 0.05,
                ped: id.to_string(),
                position: [v[0] * k as f64, v[1] * k as f64],
            })
        })
        .collect()
}

fn forecast(ped: &str, v: [f64; 2], tick: u64, offset: [f64; 2]) -> PredictionRecord {
    PredictionRecord {
        tick,
        t: tick as f64 * 0.05,
        ped: ped.into(),
        points: (1..=3)
            .map(|k| {
                let s = (tick + k) as f64;
                [v[0] * s + offset[0], v[1] * s + offset[1]]
            })
            .collect(),
    }
}

#[test]
fn ade_exact_and_offset() {
    let mut l = log("s", 100.0, vec![]);
    assert_eq!(ade(&l).unwrap(), None);
    l.tracks = tracked(&[("p0", [0.1, 0.0])], 10);
    l.predictions = vec![forecast("p0", [0.1, 0.0], 0, [0.0, 0.0]), forecast("p0", [0.1, 0.0], 4, [0.0, 0.0])];
    assert_eq!(ade(&l).unwrap(), Some(0.0));
    l.predictions = vec![forecast("p0", [0.1, 0.0], 0, [1.0, 0.0]), forecast("p0", [0.1, 0.0], 4, [1.0, 0.0])];
    assert_eq!(ade(&l).unwrap(), Some(1.0));
}

#[test]
fn ade_two_pedestrians_hand_summed() {
    let mut l = log("s", 100.0, vec![]);
    l.tracks = tracked(&[("a", [0.1, 0.0]), ("b", [0.0, 0.2])], 10);
    // a: 3 points off by 3-4-5 → 5 m each; b: 3 points off by 0.5 m; b at tick 9 has one point in range.
    l.predictions = vec![
        forecast("a", [0.1, 0.0], 0, [3.0, 4.0]),
        forecast("b", [0.0, 0.2], 2, [0.0, -0.5]),
        forecast("b", [0.0, 0.2], 9, [0.0, 2.0]),
    ];
    let hand = (3.0 * 5.0 + 3.0 * 0.5 + 1.0 * 2.0) / 7.0;
    assert!((ade(&l).unwrap().unwrap() - hand).abs() < 1e-12);
    l.predictions.push(forecast("ghost", [0.0, 0.0], 0, [0.0, 0.0]));
    assert_eq!(ade(&l).unwrap_err().code(), "unknown_pedestrian");
}

#[test]
fn empty_log_gives_zero_report() {
    let r = report(&[log("s", 0.0, vec![])], &[spec("s")]).unwrap();
    assert_eq!((r.collisions_per_km, r.mean_pmais3, r.fpbr, r.ade), (0.0, 0.0, 0.0, None));
    assert_eq!((r.collisions, r.braking_events, r.crossings), (0, 0, 0));
}

#[test]
fn weighted_two_run_report() {
    // Run a: 1 collision at 10 m/s over 0.5 km, 2 brakes (1 false positive).
    let mut a_events = vec![hit(3.0, 10.0), ev(4.0, EventKind::CrossingEnter, "p0"), ev(5.0, EventKind::CrossingExit, "p0")];
    a_events.extend(braking(&[3.5, 30.0]));
    // Run b: 2 collisions at 0 and 20 m/s over 1.5 km, 1 brake with no crossing.
    let mut b_events = vec![hit(1.0, 0.0), hit(2.0, 20.0)];
    b_events.extend(braking(&[10.0]));
    let logs = vec![log("a", 500.0, sorted(a_events)), log("b", 1500.0, sorted(b_events))];
    let r = report(&logs, &[spec("a"), spec("b")]).unwrap();
    assert_eq!(r.collisions_per_km, 3.0 / 2.0);
    let oracle = |v: f64| 1.0 / (1.0 + (3.164 - 0.288 * v).exp());
    assert!((r.mean_pmais3 - (oracle(10.0) + oracle(0.0) + oracle(20.0)) / 3.0).abs() < 1e-15);
    assert_eq!(r.fpbr, 2.0 / 3.0);
    assert_eq!(r.distance_km, 2.0);
    assert_eq!(r.runs[0].collisions_per_km, Some(2.0));
    assert_eq!(r.runs[1].collisions_per_km, Some(2.0 / 1.5));

    let bytes = write_report(&r);
    assert_eq!(read_report(&bytes).unwrap(), r);
    assert_eq!(write_report(&read_report(&bytes).unwrap()), bytes);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut shuffled_logs = logs.clone();
    let mut specs = vec![spec("a"), spec("b")];
    for _ in 0..10 {
        shuffled_logs.shuffle(&mut rng);
        specs.shuffle(&mut rng);
        assert_eq!(report(&shuffled_logs, &specs).unwrap(), r);
    }
}

#[test]
fn mismatched_inputs() {
    assert_eq!(report(&[log("a", 1.0, vec![])], &[]).unwrap_err().code(), "mismatched_inputs");
    assert_eq!(report(&[log("a", 1.0, vec![])], &[spec("b")]).unwrap_err().code(), "mismatched_inputs");
}

proptest! {
    #[test]
    fn pmais3_bounded_and_increasing(a in 0.0..60.0f64, d in 1e-6..10.0f64) {
        let (pa, pb) = (p_mais3(a).unwrap(), p_mais3(a + d).unwrap());
        prop_assert!(pa > 0.0 && pb < 1.0 && pb > pa);
    }

    #[test]
    fn fpbr_bounded_and_monotone_under_removal(
        starts in prop::collection::vec(0u32..400, 1..12),
        crossings in prop::collection::vec((0u32..400, 1u32..40), 0..6),
    ) {
        let mut starts: Vec<f64> = starts.into_iter().map(|s| s as f64 * 1.0).collect();
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        let build = |starts: &[f64]| {
            let mut events = braking(starts);
            for (i, (a, len)) in crossings.iter().enumerate() {
                let id = format!("p{i}");
                events.push(ev(*a as f64 * 0.5, EventKind::CrossingEnter, &id));
                events.push(ev(*a as f64 * 0.5 + *len as f64 * 0.1, EventKind::CrossingExit, &id));
            }
            log("s", 100.0, sorted(events))
        };
        let full = build(&starts);
        let f = fpbr(&full);
        prop_assert!((0.0..=1.0).contains(&f));
        let crossing_iv = pedsim::metrics::crossing_intervals(&full);
        if let Some(i) = starts.iter().position(|t| !crossing_iv.iter().any(|(a, b)| *a <= t + 3.0 && *b >= t - 1.0)) {
            let mut fewer = starts.clone();
            fewer.remove(i);
            prop_assert!(fpbr(&build(&fewer)) <= f + 1e-15);
        }
    }

    #[test]
    fn ade_nonnegative_and_zero_iff_exact(dx in -2.0..2.0f64, dy in -2.0..2.0f64) {
        let mut l = log("s", 100.0, vec![]);
        l.tracks = tracked(&[("p0", [0.1, 0.05])], 10);
        l.predictions = vec![forecast("p0", [0.1, 0.05], 1, [dx, dy])];
        let a = ade(&l).unwrap().unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a == 0.0, dx == 0.0 && dy == 0.0);
    }
}
