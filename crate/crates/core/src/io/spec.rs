use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ensure_finite, from_json, to_canonical_json, FormatError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpawnPose {
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from +x.
    pub yaw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    pub length: f64,
    pub width: f64,
    pub initial_speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planner: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Interactive,
    Ambient,
}

/// How an idle pedestrian is switched to its active clip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TriggerSpec {
    /// Ego within `radius` meters and the pedestrian within ±`half_angle` of the ego heading.
    Proximity { radius: f64, half_angle: f64 },
    /// Scenario-level trigger at a fixed simulation time.
    Time { at_s: f64 },
}

impl Default for TriggerSpec {
    fn default() -> Self {
        TriggerSpec::Proximity { radius: 20.0, half_angle: PI / 3.0 }
    }
}

fn default_radius() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianSpec {
    pub id: String,
    pub clip: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle_clip: Option<String>,
    pub spawn: SpawnPose,
    #[serde(default)]
    pub trigger: TriggerSpec,
    pub role: Role,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

/// Static obstacle as an oriented rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub id: String,
    pub center: [f64; 2],
    pub length: f64,
    pub width: f64,
    pub yaw: f64,
}

/// Scripted background vehicle driving its lane polyline at constant speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub id: String,
    pub lane: Vec<[f64; 2]>,
    pub speed: f64,
    pub length: f64,
    pub width: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianCounts {
    pub interactive: usize,
    pub ambient: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub timeout_s: f64,
    pub blend_duration_s: f64,
    pub corridor_margin: f64,
    pub reroute_lookahead_s: f64,
    pub brake_signal_threshold: f64,
    pub brake_accel_threshold: f64,
    pub brake_sustain_s: f64,
    pub tick_budget_ms: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            timeout_s: 60.0,
            blend_duration_s: 0.5,
            corridor_margin: 0.5,
            reroute_lookahead_s: 1.0,
            brake_signal_threshold: 0.5,
            brake_accel_threshold: -2.0,
            brake_sustain_s: 0.2,
            tick_budget_ms: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: String,
    pub seed: u64,
    /// Metadata only.
    pub weather: String,
    pub route: Vec<[f64; 2]>,
    pub ego: EgoSpec,
    pub pedestrians: Vec<PedestrianSpec>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default)]
    pub vehicles: Vec<VehicleSpec>,
    #[serde(default)]
    pub vehicle_count: usize,
    #[serde(default)]
    pub pedestrian_counts: PedestrianCounts,
    #[serde(default)]
    pub settings: SimSettings,
}

fn positive(v: f64, what: &str) -> Result<(), FormatError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(FormatError::invalid("nonpositive_extent", format!("{what} must be positive, got {v}")))
    }
}

impl ScenarioSpec {
    pub fn route_length(&self) -> f64 {
        self.route
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum()
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        if self.id.is_empty() {
            return Err(FormatError::invalid("empty_id", "scenario id is empty"));
        }
        if self.route.len() < 2 {
            return Err(FormatError::invalid(
                "route_too_short",
                format!("route needs at least 2 waypoints, got {}", self.route.len()),
            ));
        }
        ensure_finite(self.route.iter().flatten().copied(), "route")?;
        if self.route_length() <= 0.0 {
            return Err(FormatError::invalid("route_too_short", "route has zero length"));
        }
        positive(self.ego.length, "ego length")?;
        positive(self.ego.width, "ego width")?;
        if !(self.ego.initial_speed.is_finite() && self.ego.initial_speed >= 0.0) {
            return Err(FormatError::invalid("negative_speed", "ego initial speed must be non-negative"));
        }
        let mut ids = BTreeSet::new();
        for p in &self.pedestrians {
            if !ids.insert(p.id.as_str()) {
                return Err(FormatError::invalid("duplicate_agent", format!("pedestrian id `{}` repeated", p.id)));
            }
            ensure_finite([p.spawn.x, p.spawn.y, p.spawn.yaw], "spawn pose")?;
            positive(p.radius, "pedestrian radius")?;
            match p.trigger {
                TriggerSpec::Proximity { radius, half_angle } => {
                    positive(radius, "trigger radius")?;
                    if !(half_angle > 0.0 && half_angle <= PI) {
                        return Err(FormatError::invalid(
                            "trigger_half_angle",
                            format!("trigger half-angle must lie in (0, π], got {half_angle}"),
                        ));
                    }
                }
                TriggerSpec::Time { at_s } => {
                    if !(at_s.is_finite() && at_s >= 0.0) {
                        return Err(FormatError::invalid("trigger_time", "time trigger must be non-negative"));
                    }
                }
            }
        }
        for o in &self.obstacles {
            if !ids.insert(o.id.as_str()) {
                return Err(FormatError::invalid("duplicate_agent", format!("obstacle id `{}` repeated", o.id)));
            }
            ensure_finite([o.center[0], o.center[1], o.yaw], "obstacle pose")?;
            positive(o.length, "obstacle length")?;
            positive(o.width, "obstacle width")?;
        }
        for v in &self.vehicles {
            if !ids.insert(v.id.as_str()) {
                return Err(FormatError::invalid("duplicate_agent", format!("vehicle id `{}` repeated", v.id)));
            }
            if v.lane.len() < 2 {
                return Err(FormatError::invalid("route_too_short", format!("vehicle `{}` lane needs 2 waypoints", v.id)));
            }
            ensure_finite(v.lane.iter().flatten().copied(), "vehicle lane")?;
            positive(v.length, "vehicle length")?;
            positive(v.width, "vehicle width")?;
            if !(v.speed.is_finite() && v.speed >= 0.0) {
                return Err(FormatError::invalid("negative_speed", format!("vehicle `{}` speed", v.id)));
            }
        }
        let s = &self.settings;
        positive(s.timeout_s, "timeout")?;
        positive(s.tick_budget_ms, "tick budget")?;
        positive(s.reroute_lookahead_s, "reroute lookahead")?;
        ensure_finite(
            [s.blend_duration_s, s.corridor_margin, s.brake_signal_threshold, s.brake_accel_threshold, s.brake_sustain_s],
            "settings",
        )?;
        if s.blend_duration_s < 0.0 || s.corridor_margin < 0.0 || s.brake_sustain_s < 0.0 {
            return Err(FormatError::invalid("negative_setting", "durations and margins must be non-negative"));
        }
        Ok(())
    }
}

pub fn read_scenario_spec(bytes: &[u8]) -> Result<ScenarioSpec, FormatError> {
    let spec: ScenarioSpec = from_json(bytes)?;
    spec.validate()?;
    Ok(spec)
}

pub fn write_scenario_spec(spec: &ScenarioSpec) -> Result<Vec<u8>, FormatError> {
    spec.validate()?;
    Ok(to_canonical_json(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn spec() -> ScenarioSpec {
        ScenarioSpec {
            id: "s".into(),
            seed: 3,
            weather: "ClearNoon".into(),
            route: vec![[0.0, 0.0], [100.0, 0.0]],
            ego: EgoSpec { length: 4.5, width: 1.8, initial_speed: 8.0, planner: None },
            pedestrians: vec![PedestrianSpec {
                id: "p0".into(),
                clip: "walk".into(),
                idle_clip: None,
                spawn: SpawnPose { x: 30.0, y: -3.0, yaw: 1.5 },
                trigger: TriggerSpec::default(),
                role: Role::Interactive,
                radius: 0.3,
            }],
            obstacles: vec![ObstacleSpec { id: "wall".into(), center: [10.0, 5.0], length: 2.0, width: 0.5, yaw: 0.0 }],
            vehicles: vec![],
            vehicle_count: 0,
            pedestrian_counts: PedestrianCounts { interactive: 1, ambient: 0 },
            settings: SimSettings::default(),
        }
    }

    #[test]
    fn round_trip() {
        let bytes = write_scenario_spec(&spec()).unwrap();
        let back = read_scenario_spec(&bytes).unwrap();
        assert_eq!(back, spec());
        assert_eq!(write_scenario_spec(&back).unwrap(), bytes);
    }

    #[test]
    fn single_waypoint_is_rejected() {
        let mut s = spec();
        s.route.truncate(1);
        assert_eq!(s.validate().unwrap_err().code(), "route_too_short");
        let doc = to_canonical_json(&s);
        assert_eq!(read_scenario_spec(&doc).unwrap_err().code(), "route_too_short");
    }

    #[test]
    fn nonpositive_footprint_is_rejected() {
        let mut s = spec();
        s.ego.width = 0.0;
        assert_eq!(s.validate().unwrap_err().code(), "nonpositive_extent");
        let mut s = spec();
        s.pedestrians[0].trigger = TriggerSpec::Proximity { radius: 5.0, half_angle: 0.0 };
        assert_eq!(s.validate().unwrap_err().code(), "trigger_half_angle");
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let doc = r#"{"id":"x","seed":1,"weather":"w","route":[[0,0],[1,0]],
            "ego":{"length":4,"width":2,"initial_speed":0},
            "pedestrians":[{"id":"p","clip":"c","spawn":{"x":0,"y":1,"yaw":0},"role":"ambient"}]}"#;
        let s = read_scenario_spec(doc.as_bytes()).unwrap();
        assert_eq!(s.settings, SimSettings::default());
        assert_eq!(s.pedestrians[0].radius, 0.3);
        assert_eq!(s.pedestrians[0].trigger, TriggerSpec::default());
    }
}
