use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{rotate, static_collision_check, Circle, Obb, Shape, Vec2};
use super::ScenarioError;
use crate::io::{ClipFrame, RetargetedClip};
use crate::rotmath::{matrix_to_euler_xyz, EulerXYZ};

pub const REROUTE_OFFSETS_DEG: [f64; 6] = [15.0, -15.0, 30.0, -30.0, 45.0, -45.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EgoState {
    /// Footprint center.
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
    /// Arc length of `position` along the route.
    pub route_s: f64,
    pub length: f64,
    pub width: f64,
}

impl EgoState {
    pub fn footprint(&self) -> Obb {
        Obb::new(self.position, self.length, self.width, self.heading)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.heading.cos(), self.heading.sin()) * self.speed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum PedPhase {
    Idle,
    Blending { progress: f64 },
    Active { frame: usize },
    Done,
}

impl PedPhase {
    pub fn rank(&self) -> u8 {
        match self {
            PedPhase::Idle => 0,
            PedPhase::Blending { .. } => 1,
            PedPhase::Active { .. } => 2,
            PedPhase::Done => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriggerParams {
    pub radius: f64,
    pub half_angle: f64,
}

impl Default for TriggerParams {
    fn default() -> Self {
        TriggerParams { radius: 20.0, half_angle: PI / 3.0 }
    }
}

const BOUNDARY_SLACK: f64 = 1e-12;

/// Closed distance-and-cone test against the ego heading.
pub fn evaluate_trigger(ego: &EgoState, ped: Vec2, p: &TriggerParams) -> bool {
    let d = ped - ego.position;
    let dist = d.norm();
    if dist > p.radius * (1.0 + BOUNDARY_SLACK) {
        return false;
    }
    if dist == 0.0 {
        return true;
    }
    let fwd = Vec2::new(ego.heading.cos(), ego.heading.sin());
    let bearing = (fwd.perp(&d)).atan2(fwd.dot(&d)).abs();
    bearing <= p.half_angle + BOUNDARY_SLACK
}

/// Per-joint slerp of rotations and lerp of root position; endpoints are returned verbatim.
pub fn blend(idle: &ClipFrame, active: &ClipFrame, u: f64) -> Result<ClipFrame, ScenarioError> {
    if idle.joints.len() != active.joints.len() {
        return Err(ScenarioError::JointCount { expected: idle.joints.len(), found: active.joints.len() });
    }
    if u <= 0.0 {
        return Ok(idle.clone());
    }
    if u >= 1.0 {
        return Ok(active.clone());
    }
    let mix = |a: &EulerXYZ, b: &EulerXYZ| matrix_to_euler_xyz(&a.to_matrix().slerp(&b.to_matrix(), u)).angles;
    Ok(ClipFrame {
        root_position: idle.root_position.lerp(&active.root_position, u),
        root_euler: mix(&idle.root_euler, &active.root_euler),
        joints: idle.joints.iter().zip(&active.joints).map(|(a, b)| mix(a, b)).collect(),
    })
}

/// Ground-plane root displacement of each clip frame relative to frame 0, in
/// the simulator's left-handed-to-right-handed convention: clip `x` forward
/// maps to local forward, clip `y` (right) to local `-y`.
pub fn clip_local_path(clip: &RetargetedClip) -> Vec<Vec2> {
    let o = clip.frames[0].root_position;
    clip.frames
        .iter()
        .map(|f| Vec2::new(f.root_position.x - o.x, -(f.root_position.y - o.y)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum RerouteOutcome {
    Unchanged,
    Rerouted { offset_deg: f64, path: Vec<Vec2> },
    Halted,
}

fn sweep(path: &[Vec2], radius: f64) -> Vec<Shape> {
    path.iter().map(|c| Shape::Circle(Circle { center: *c, radius })).collect()
}

/// Static avoidance for the remaining root path.
///
/// `path[0]` is the current position. When any of the next `lookahead` placements
/// touches an obstacle, the whole remaining displacement is rotated about the
/// current position by each offset in [`REROUTE_OFFSETS_DEG`] order; the first
/// candidate whose every future placement is clear wins.
pub fn reroute(path: &[Vec2], radius: f64, obstacles: &[(String, Obb)], lookahead: usize) -> RerouteOutcome {
    if path.len() < 2 || obstacles.is_empty() {
        return RerouteOutcome::Unchanged;
    }
    let end = (lookahead + 1).min(path.len());
    if static_collision_check(&sweep(&path[1..end], radius), obstacles).is_none() {
        return RerouteOutcome::Unchanged;
    }
    let origin = path[0];
    for offset_deg in REROUTE_OFFSETS_DEG {
        let a = offset_deg.to_radians();
        let candidate: Vec<Vec2> = path.iter().map(|p| origin + rotate(p - origin, a)).collect();
        if static_collision_check(&sweep(&candidate[1..], radius), obstacles).is_none() {
            return RerouteOutcome::Rerouted { offset_deg, path: candidate };
        }
    }
    RerouteOutcome::Halted
}
