//! Planner plug-in contract and the shipped baselines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::agents::PedPhase;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("planner `{planner}`: {message}")]
pub struct PlannerError {
    pub planner: String,
    pub message: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Control {
    /// Requested longitudinal acceleration, m/s²; clamped by the simulator.
    pub accel: f64,
    /// Brake pedal in [0, 1]; 1 commands the maximum deceleration.
    #[serde(default)]
    pub brake_signal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoObservation {
    pub position: [f64; 2],
    pub heading: f64,
    pub speed: f64,
    pub route_s: f64,
    pub route_length: f64,
    pub length: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PedObservation {
    pub id: String,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub radius: f64,
    /// Distance from the pedestrian center to the route polyline.
    pub lateral: f64,
    /// Route arc length of the pedestrian's projection minus that of the ego front bumper.
    pub ahead: f64,
    #[serde(flatten)]
    pub phase: PedPhase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleObservation {
    pub id: String,
    pub position: [f64; 2],
    pub heading: f64,
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub tick: u64,
    pub t: f64,
    pub dt: f64,
    pub ego: EgoObservation,
    /// Half ego width plus the corridor margin.
    pub corridor_half_width: f64,
    pub pedestrians: Vec<PedObservation>,
    pub vehicles: Vec<VehicleObservation>,
}

pub trait Planner {
    fn name(&self) -> &str;

    fn observe(&mut self, obs: &Observation) -> Result<Control, PlannerError>;

    /// Future positions of `ped` at the next `horizon` ticks, if the planner forecasts.
    fn predict(&mut self, _ped: &str, _horizon: usize) -> Option<Vec<[f64; 2]>> {
        None
    }
}

/// Holds whatever speed the ego starts with.
#[derive(Clone, Debug, Default)]
pub struct ConstantSpeed;

impl Planner for ConstantSpeed {
    fn name(&self) -> &str {
        "constant_speed"
    }

    fn observe(&mut self, _obs: &Observation) -> Result<Control, PlannerError> {
        Ok(Control::default())
    }
}

/// Full brake while any pedestrian footprint is inside the route corridor and
/// no more than `trigger_distance` ahead of the front bumper; otherwise
/// accelerate back to the initial cruise speed.
#[derive(Clone, Debug)]
pub struct ReactiveBrake {
    pub trigger_distance: f64,
    pub max_accel: f64,
    pub forecast: bool,
    cruise: Option<f64>,
    last: BTreeMap<String, ([f64; 2], [f64; 2], f64)>,
}

impl Default for ReactiveBrake {
    fn default() -> Self {
        ReactiveBrake { trigger_distance: 15.0, max_accel: 3.0, forecast: true, cruise: None, last: BTreeMap::new() }
    }
}

impl ReactiveBrake {
    pub fn without_forecast() -> Self {
        ReactiveBrake { forecast: false, ..Self::default() }
    }

    pub fn threatened(&self, obs: &Observation) -> bool {
        obs.pedestrians.iter().any(|p| {
            p.lateral - p.radius <= obs.corridor_half_width
                && p.ahead <= self.trigger_distance
                && p.ahead >= -obs.ego.length - p.radius
        })
    }
}

impl Planner for ReactiveBrake {
    fn name(&self) -> &str {
        if self.forecast {
            "reactive_brake"
        } else {
            "reactive_brake_blind"
        }
    }

    fn observe(&mut self, obs: &Observation) -> Result<Control, PlannerError> {
        let cruise = *self.cruise.get_or_insert(obs.ego.speed);
        self.last = obs.pedestrians.iter().map(|p| (p.id.clone(), (p.position, p.velocity, obs.dt))).collect();
        if self.threatened(obs) {
            return Ok(Control { accel: -8.0, brake_signal: 1.0 });
        }
        let accel = if obs.ego.speed < cruise { ((cruise - obs.ego.speed) / obs.dt).min(self.max_accel) } else { 0.0 };
        Ok(Control { accel, brake_signal: 0.0 })
    }

    /// Constant-velocity extrapolation from the latest observation.
    fn predict(&mut self, ped: &str, horizon: usize) -> Option<Vec<[f64; 2]>> {
        if !self.forecast {
            return None;
        }
        let (p, v, dt) = self.last.get(ped)?;
        Some(
            (1..=horizon)
                .map(|k| {
                    let s = k as f64 * dt;
                    [p[0] + v[0] * s, p[1] + v[1] * s]
                })
                .collect(),
        )
    }
}

/// Looks up a shipped baseline by its log name.
pub fn builtin_planner(name: &str) -> Option<Box<dyn Planner>> {
    match name {
        "constant_speed" => Some(Box::new(ConstantSpeed)),
        "reactive_brake" => Some(Box::new(ReactiveBrake::default())),
        "reactive_brake_blind" => Some(Box::new(ReactiveBrake::without_forecast())),
        _ => None,
    }
}
