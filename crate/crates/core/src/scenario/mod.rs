//! Deterministic ground-plane pedestrian–vehicle interaction simulator.

pub mod agents;
pub mod geometry;
pub mod planner;
pub mod sim;
pub mod stdio;

use thiserror::Error;

use crate::io::FormatError;

pub use agents::{blend, evaluate_trigger, reroute, EgoState, PedPhase, RerouteOutcome, TriggerParams, REROUTE_OFFSETS_DEG};
pub use geometry::{static_collision_check, Circle, Obb, Polyline, Shape, StaticHit, Vec2};
pub use planner::{builtin_planner, ConstantSpeed, Control, Observation, Planner, PlannerError, ReactiveBrake};
pub use sim::{run, ClipLibrary, PedestrianAgent, Simulation, DEFAULT_TICK, PREDICTION_HORIZON};
pub use stdio::StdioPlanner;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("pedestrian `{ped}` references unknown clip `{clip}`")]
    MissingClip { ped: String, clip: String },
    #[error("pose has {found} joints, expected {expected}")]
    JointCount { expected: usize, found: usize },
    #[error("tick must be positive and finite, got {0}")]
    InvalidTick(f64),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::MissingClip { .. } => "missing_clip",
            ScenarioError::JointCount { .. } => "joint_count",
            ScenarioError::InvalidTick(_) => "invalid_tick",
            ScenarioError::Planner(_) => "planner_error",
            ScenarioError::Format(e) => e.code(),
        }
    }
}
