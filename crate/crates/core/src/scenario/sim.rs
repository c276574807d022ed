use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::agents::{blend, clip_local_path, evaluate_trigger, reroute, EgoState, PedPhase, RerouteOutcome, TriggerParams};
use super::geometry::{obb_circle, rotate, Circle, Obb, Polyline, Vec2};
use super::planner::{EgoObservation, Observation, PedObservation, Planner, VehicleObservation};
use super::ScenarioError;
use crate::io::{
    ClipFrame, Event, EventKind, FormatError, LogHeader, LogSummary, PedestrianSpec, PredictionRecord, RetargetedClip,
    Role, RunOutcome, ScenarioLog, ScenarioSpec, TrackSample, TriggerSpec, CLIP_FPS,
};

pub const DEFAULT_TICK: f64 = 1.0 / CLIP_FPS;
pub const PREDICTION_HORIZON: usize = 20;
pub const ACCEL_MIN: f64 = -8.0;
pub const ACCEL_MAX: f64 = 3.0;
const EPS: f64 = 1e-9;

pub type ClipLibrary = BTreeMap<String, RetargetedClip>;

#[derive(Clone, Debug)]
pub struct PedestrianAgent {
    pub spec: PedestrianSpec,
    pub phase: PedPhase,
    pub position: Vec2,
    pub velocity: Vec2,
    /// World root position per active clip frame.
    pub path: Vec<Vec2>,
    /// Frames whose position was changed by rerouting.
    pub rerouted: Vec<bool>,
    pub halted: bool,
    idle_offset: usize,
    phase_ticks: u64,
    in_corridor: bool,
    collided: bool,
}

impl PedestrianAgent {
    pub fn footprint(&self) -> Circle {
        Circle { center: self.position, radius: self.spec.radius }
    }
}

#[derive(Clone, Debug)]
struct Vehicle {
    id: String,
    lane: Polyline,
    speed: f64,
}

struct BrakeTracker {
    onset: Option<u64>,
    active: bool,
}

/// Fixed-step simulation state. [`run`] drives it to completion.
pub struct Simulation<'a> {
    spec: &'a ScenarioSpec,
    clips: &'a ClipLibrary,
    route: Polyline,
    obstacles: Vec<(String, Obb)>,
    vehicles: Vec<Vehicle>,
    dt: f64,
    tick: u64,
    ego: EgoState,
    peds: Vec<PedestrianAgent>,
    brake: BrakeTracker,
    events: Vec<Event>,
    tracks: Vec<TrackSample>,
    predictions: Vec<PredictionRecord>,
    outcome: Option<RunOutcome>,
    planner_name: String,
}

fn clip<'c>(clips: &'c ClipLibrary, p: &PedestrianSpec, name: &str) -> Result<&'c RetargetedClip, ScenarioError> {
    clips.get(name).ok_or_else(|| ScenarioError::MissingClip { ped: p.id.clone(), clip: name.to_string() })
}

impl<'a> Simulation<'a> {
    pub fn new(spec: &'a ScenarioSpec, clips: &'a ClipLibrary, dt: f64, planner_name: &str) -> Result<Self, ScenarioError> {
        spec.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ScenarioError::InvalidTick(dt));
        }
        let route = Polyline::new(&spec.route).ok_or_else(|| FormatError::invalid("route_too_short", "route has zero length"))?;
        let (pos, heading) = route.pose_at(0.0);
        let ego = EgoState {
            position: pos,
            heading,
            speed: spec.ego.initial_speed,
            route_s: 0.0,
            length: spec.ego.length,
            width: spec.ego.width,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut peds = Vec::with_capacity(spec.pedestrians.len());
        for p in &spec.pedestrians {
            let active = clip(clips, p, &p.clip)?;
            let idle_offset = match &p.idle_clip {
                Some(name) => {
                    let idle = clip(clips, p, name)?;
                    if idle.joint_names.len() != active.joint_names.len() {
                        return Err(ScenarioError::JointCount {
                            expected: idle.joint_names.len(),
                            found: active.joint_names.len(),
                        });
                    }
                    rng.gen_range(0..idle.frames.len())
                }
                None => 0,
            };
            let spawn = Vec2::new(p.spawn.x, p.spawn.y);
            let path: Vec<Vec2> = clip_local_path(active).into_iter().map(|d| spawn + rotate(d, p.spawn.yaw)).collect();
            peds.push(PedestrianAgent {
                spec: p.clone(),
                phase: PedPhase::Idle,
                position: spawn,
                velocity: Vec2::zeros(),
                rerouted: vec![false; path.len()],
                path,
                halted: false,
                idle_offset,
                phase_ticks: 0,
                in_corridor: false,
                collided: false,
            });
        }
        let vehicles = spec
            .vehicles
            .iter()
            .map(|v| {
                Polyline::new(&v.lane)
                    .map(|lane| Vehicle { id: v.id.clone(), lane, speed: v.speed })
                    .ok_or_else(|| FormatError::invalid("route_too_short", format!("vehicle `{}` lane has zero length", v.id)))
            })
            .collect::<Result<_, _>>()?;
        let mut sim = Simulation {
            spec,
            clips,
            route,
            obstacles: spec.obstacles.iter().map(|o| (o.id.clone(), Obb::from_obstacle(o))).collect(),
            vehicles,
            dt,
            tick: 0,
            ego,
            peds,
            brake: BrakeTracker { onset: None, active: false },
            events: vec![Event::new(0.0, EventKind::RunStart, vec![])],
            tracks: Vec::new(),
            predictions: Vec::new(),
            outcome: None,
            planner_name: planner_name.to_string(),
        };
        sim.contacts();
        sim.record_tracks();
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.dt
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn ego(&self) -> &EgoState {
        &self.ego
    }

    pub fn pedestrians(&self) -> &[PedestrianAgent] {
        &self.peds
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn outcome(&self) -> Option<RunOutcome> {
        self.outcome
    }

    pub fn corridor_half_width(&self) -> f64 {
        self.spec.ego.width / 2.0 + self.spec.settings.corridor_margin
    }

    /// Full-body pose currently played by pedestrian `i`.
    pub fn pedestrian_pose(&self, i: usize) -> Result<ClipFrame, ScenarioError> {
        let p = &self.peds[i];
        let active = clip(self.clips, &p.spec, &p.spec.clip)?;
        let idle_frame = || -> Result<ClipFrame, ScenarioError> {
            Ok(match &p.spec.idle_clip {
                Some(name) => {
                    let idle = clip(self.clips, &p.spec, name)?;
                    idle.frames[(p.idle_offset + self.tick as usize) % idle.frames.len()].clone()
                }
                None => active.frames[0].clone(),
            })
        };
        match p.phase {
            PedPhase::Idle => idle_frame(),
            PedPhase::Blending { progress } => blend(&idle_frame()?, &active.frames[0], progress),
            PedPhase::Active { frame } => Ok(active.frames[frame].clone()),
            PedPhase::Done => Ok(active.frames.last().unwrap().clone()),
        }
    }

    fn emit(&mut self, kind: EventKind, agents: Vec<String>) {
        self.events.push(Event::new(self.time(), kind, agents));
    }

    fn vehicle_pose(&self, v: &Vehicle) -> (Vec2, f64) {
        v.lane.pose_at(v.speed * self.time())
    }

    fn observation(&self) -> Observation {
        let front = self.ego.route_s + self.ego.length / 2.0;
        Observation {
            tick: self.tick,
            t: self.time(),
            dt: self.dt,
            ego: EgoObservation {
                position: [self.ego.position.x, self.ego.position.y],
                heading: self.ego.heading,
                speed: self.ego.speed,
                route_s: self.ego.route_s,
                route_length: self.route.length(),
                length: self.ego.length,
                width: self.ego.width,
            },
            corridor_half_width: self.corridor_half_width(),
            pedestrians: self
                .peds
                .iter()
                .map(|p| {
                    let pr = self.route.project(p.position);
                    PedObservation {
                        id: p.spec.id.clone(),
                        position: [p.position.x, p.position.y],
                        velocity: [p.velocity.x, p.velocity.y],
                        radius: p.spec.radius,
                        lateral: pr.distance,
                        ahead: pr.s - front,
                        phase: p.phase,
                    }
                })
                .collect(),
            vehicles: self
                .vehicles
                .iter()
                .map(|v| {
                    let (pos, heading) = self.vehicle_pose(v);
                    VehicleObservation { id: v.id.clone(), position: [pos.x, pos.y], heading, speed: v.speed }
                })
                .collect(),
        }
    }

    fn fire_triggers(&mut self) {
        let t = self.time();
        for i in 0..self.peds.len() {
            let p = &self.peds[i];
            if p.phase != PedPhase::Idle || p.spec.role == Role::Ambient {
                continue;
            }
            let fire = match p.spec.trigger {
                TriggerSpec::Proximity { radius, half_angle } => {
                    evaluate_trigger(&self.ego, p.position, &TriggerParams { radius, half_angle })
                }
                TriggerSpec::Time { at_s } => t >= at_s - EPS,
            };
            if fire {
                let id = p.spec.id.clone();
                let p = &mut self.peds[i];
                p.phase_ticks = 0;
                p.phase = if self.spec.settings.blend_duration_s > 0.0 {
                    PedPhase::Blending { progress: 0.0 }
                } else {
                    PedPhase::Active { frame: 0 }
                };
                self.emit(EventKind::TriggerFired, vec![id]);
            }
        }
    }

    fn track_brake(&mut self, braking: bool) {
        if braking {
            let onset = *self.brake.onset.get_or_insert(self.tick);
            let held = (self.tick - onset + 1) as f64 * self.dt;
            if !self.brake.active && held >= self.spec.settings.brake_sustain_s - EPS {
                self.brake.active = true;
                self.events.push(Event::new(onset as f64 * self.dt, EventKind::BrakeStart, vec!["ego".into()]));
            }
        } else {
            if self.brake.active {
                self.emit(EventKind::BrakeEnd, vec!["ego".into()]);
            }
            self.brake = BrakeTracker { onset: None, active: false };
        }
    }

    fn advance_ego(&mut self, accel: f64) {
        let v0 = self.ego.speed;
        let v1 = v0 + accel * self.dt;
        let (ds, v1) = if v1 < 0.0 {
            (if accel < 0.0 { v0 * v0 / (2.0 * -accel) } else { 0.0 }, 0.0)
        } else {
            (v0 * self.dt + 0.5 * accel * self.dt * self.dt, v1)
        };
        let s = (self.ego.route_s + ds).min(self.route.length());
        let (pos, heading) = self.route.pose_at(s);
        self.ego.route_s = s;
        self.ego.position = pos;
        self.ego.heading = heading;
        self.ego.speed = v1;
    }

    fn advance_pedestrians(&mut self) {
        let lookahead = (self.spec.settings.reroute_lookahead_s * CLIP_FPS).ceil() as usize;
        let blend_s = self.spec.settings.blend_duration_s;
        let t = self.time();
        for i in 0..self.peds.len() {
            let mut pending = None;
            let p = &mut self.peds[i];
            let before = p.position;
            match p.phase {
                PedPhase::Idle | PedPhase::Done => {}
                PedPhase::Blending { .. } => {
                    p.phase_ticks += 1;
                    let u = p.phase_ticks as f64 * self.dt / blend_s;
                    if u >= 1.0 - EPS {
                        p.phase = PedPhase::Active { frame: 0 };
                        p.phase_ticks = 0;
                        p.position = p.path[0];
                    } else {
                        p.phase = PedPhase::Blending { progress: u };
                        let spawn = Vec2::new(p.spec.spawn.x, p.spec.spawn.y);
                        p.position = spawn.lerp(&p.path[0], u);
                    }
                }
                PedPhase::Active { .. } if p.halted => {}
                PedPhase::Active { frame } => {
                    match reroute(&p.path[frame..], p.spec.radius, &self.obstacles, lookahead) {
                        RerouteOutcome::Unchanged => {}
                        RerouteOutcome::Rerouted { offset_deg, path } => {
                            p.path.splice(frame.., path);
                            p.rerouted[frame + 1..].iter_mut().for_each(|r| *r = true);
                            pending = Some((EventKind::Reroute, Some(format!("{offset_deg:+}deg"))));
                        }
                        RerouteOutcome::Halted => {
                            p.halted = true;
                            pending = Some((EventKind::RerouteFailed, None));
                        }
                    }
                    if !p.halted {
                        p.phase_ticks += 1;
                        let f = (p.phase_ticks as f64 * self.dt * CLIP_FPS + EPS).floor() as usize;
                        let last = p.path.len() - 1;
                        p.phase = if f >= last { PedPhase::Done } else { PedPhase::Active { frame: f } };
                        p.position = p.path[f.min(last)];
                    }
                }
            }
            p.velocity = (p.position - before) / self.dt;
            if let Some((kind, detail)) = pending {
                let mut e = Event::new(t, kind, vec![p.spec.id.clone()]);
                e.detail = detail;
                self.events.push(e);
            }
        }
    }

    fn contacts(&mut self) {
        let fp = self.ego.footprint();
        let ego_v = self.ego.velocity();
        let half = self.corridor_half_width();
        let t = self.time();
        for p in &mut self.peds {
            let c = p.footprint();
            if !p.collided && obb_circle(&fp, &c) {
                p.collided = true;
                let mut e = Event::new(t, EventKind::Collision, vec!["ego".into(), p.spec.id.clone()]);
                e.impact_speed = Some((ego_v - p.velocity).norm());
                self.events.push(e);
            }
            let inside = self.route.project(p.position).distance - p.spec.radius <= half;
            if inside != p.in_corridor {
                p.in_corridor = inside;
                let kind = if inside { EventKind::CrossingEnter } else { EventKind::CrossingExit };
                self.events.push(Event::new(t, kind, vec![p.spec.id.clone()]));
            }
        }
    }

    fn record_tracks(&mut self) {
        let t = self.time();
        for p in &self.peds {
            self.tracks.push(TrackSample {
                tick: self.tick,
                t,
                ped: p.spec.id.clone(),
                position: [p.position.x, p.position.y],
            });
        }
    }

    /// Advances one tick. Returns `false` once the run has ended.
    pub fn step(&mut self, planner: &mut dyn Planner) -> Result<bool, ScenarioError> {
        if self.outcome.is_some() {
            return Ok(false);
        }
        self.fire_triggers();
        let obs = self.observation();
        let started = Instant::now();
        let control = planner.observe(&obs)?;
        let elapsed_ms = started.elapsed().as_secs_f64() * 1000.0;
        if elapsed_ms > self.spec.settings.tick_budget_ms {
            let e = Event::new(self.time(), EventKind::PlannerTimeout, vec!["ego".into()])
                .with_detail(format!("{} exceeded {} ms tick budget", planner.name(), self.spec.settings.tick_budget_ms));
            self.events.push(e);
            self.outcome = Some(RunOutcome::Aborted);
            return Ok(false);
        }
        for p in &self.peds {
            if let Some(points) = planner.predict(&p.spec.id, PREDICTION_HORIZON) {
                self.predictions.push(PredictionRecord { tick: self.tick, t: self.time(), ped: p.spec.id.clone(), points });
            }
        }
        let brake_signal = if control.brake_signal.is_finite() { control.brake_signal.clamp(0.0, 1.0) } else { 0.0 };
        let mut accel = if control.accel.is_finite() { control.accel.clamp(ACCEL_MIN, ACCEL_MAX) } else { 0.0 };
        if brake_signal > 0.0 {
            accel = accel.min(ACCEL_MIN * brake_signal);
        }
        let s = &self.spec.settings;
        self.track_brake(brake_signal > s.brake_signal_threshold || accel <= s.brake_accel_threshold);

        self.advance_ego(accel);
        self.advance_pedestrians();
        self.tick += 1;
        self.contacts();
        self.record_tracks();

        if self.ego.route_s >= self.route.length() - EPS {
            self.outcome = Some(RunOutcome::Completed);
        } else if self.time() >= self.spec.settings.timeout_s - EPS {
            self.outcome = Some(RunOutcome::Timeout);
        }
        Ok(self.outcome.is_none())
    }

    /// Closes open intervals and assembles the log.
    pub fn finish(mut self) -> ScenarioLog {
        let outcome = self.outcome.unwrap_or(RunOutcome::Aborted);
        if self.brake.active {
            self.emit(EventKind::BrakeEnd, vec!["ego".into()]);
        }
        let open: Vec<String> = self.peds.iter().filter(|p| p.in_corridor).map(|p| p.spec.id.clone()).collect();
        for id in open {
            self.emit(EventKind::CrossingExit, vec![id]);
        }
        let label = match outcome {
            RunOutcome::Completed => "completed",
            RunOutcome::Timeout => "timeout",
            RunOutcome::Aborted => "aborted",
        };
        let end = Event::new(self.time(), EventKind::RunEnd, vec![]).with_detail(label);
        self.events.push(end);
        self.events.sort_by(|a, b| a.t.total_cmp(&b.t));
        ScenarioLog {
            header: LogHeader {
                scenario_id: self.spec.id.clone(),
                seed: self.spec.seed,
                tick: self.dt,
                planner: self.planner_name,
            },
            events: self.events,
            tracks: self.tracks,
            predictions: self.predictions,
            summary: LogSummary { t_end: self.tick as f64 * self.dt, ticks: self.tick, distance_m: self.ego.route_s, outcome },
        }
    }
}

/// Runs `spec` to completion, timeout or planner abort.
pub fn run(spec: &ScenarioSpec, clips: &ClipLibrary, planner: &mut dyn Planner, tick: f64) -> Result<ScenarioLog, ScenarioError> {
    let name = planner.name().to_string();
    let mut sim = Simulation::new(spec, clips, tick, &name)?;
    while sim.step(planner)? {}
    Ok(sim.finish())
}
