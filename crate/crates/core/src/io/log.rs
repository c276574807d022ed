//! Scenario logs: newline-delimited JSON, one record per line.
//!
//! Line order is fixed: `header`, all `event`s (time-ordered), all `track`
//! samples, all `prediction`s, then a single `summary`.

use serde::{Deserialize, Serialize};

use super::FormatError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RunStart,
    RunEnd,
    BrakeStart,
    BrakeEnd,
    CrossingEnter,
    CrossingExit,
    Collision,
    Reroute,
    RerouteFailed,
    TriggerFired,
    PlannerTimeout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub agents: Vec<String>,
    /// Relative ego–pedestrian speed at first contact, m/s; collisions only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact_speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Event {
    pub fn new(t: f64, kind: EventKind, agents: Vec<String>) -> Self {
        Event { t, kind, agents, impact_speed: None, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub scenario_id: String,
    pub seed: u64,
    pub tick: f64,
    pub planner: String,
}

/// Ground-truth pedestrian root position at the end of `tick`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackSample {
    pub tick: u64,
    pub t: f64,
    pub ped: String,
    pub position: [f64; 2],
}

/// Planner forecast made at `tick`; `points[k]` is the predicted position at tick `tick + k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub tick: u64,
    pub t: f64,
    pub ped: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Completed,
    Timeout,
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSummary {
    pub t_end: f64,
    pub ticks: u64,
    pub distance_m: f64,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioLog {
    pub header: LogHeader,
    pub events: Vec<Event>,
    pub tracks: Vec<TrackSample>,
    pub predictions: Vec<PredictionRecord>,
    pub summary: LogSummary,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Header(LogHeader),
    Event(Event),
    Track(TrackSample),
    Prediction(PredictionRecord),
    Summary(LogSummary),
}

impl ScenarioLog {
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn distance_km(&self) -> f64 {
        self.summary.distance_m / 1000.0
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        let mut last = f64::NEG_INFINITY;
        let mut braking = false;
        for e in &self.events {
            if !e.t.is_finite() || e.t < last {
                return Err(FormatError::invalid("events_unordered", format!("event at t={} out of order", e.t)));
            }
            last = e.t;
            match e.kind {
                EventKind::Collision => match e.impact_speed {
                    Some(v) if v.is_finite() && v >= 0.0 => {}
                    _ => {
                        return Err(FormatError::invalid(
                            "impact_speed",
                            format!("collision at t={} needs a non-negative impact_speed", e.t),
                        ))
                    }
                },
                EventKind::BrakeStart => {
                    if braking {
                        return Err(FormatError::invalid("brake_unmatched", format!("nested brake_start at t={}", e.t)));
                    }
                    braking = true;
                }
                EventKind::BrakeEnd => {
                    if !braking {
                        return Err(FormatError::invalid("brake_unmatched", format!("brake_end without start at t={}", e.t)));
                    }
                    braking = false;
                }
                _ => {}
            }
        }
        let s = &self.summary;
        if !(s.distance_m.is_finite() && s.distance_m >= 0.0 && s.t_end.is_finite()) {
            return Err(FormatError::invalid("summary", "summary distance/time must be finite and non-negative"));
        }
        Ok(())
    }
}

pub fn read_log(bytes: &[u8]) -> Result<ScenarioLog, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|e| FormatError::parse_at("log", None, e.to_string()))?;
    let mut header = None;
    let mut summary = None;
    let mut events = Vec::new();
    let mut tracks = Vec::new();
    let mut predictions = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = super::from_json(line.as_bytes()).map_err(|e| match e {
            FormatError::Parse { field, message, .. } => {
                FormatError::parse_at(format!("line {}: {field}", n + 1), None, message)
            }
            other => other,
        })?;
        if summary.is_some() {
            return Err(FormatError::invalid("record_order", format!("line {} follows the summary", n + 1)));
        }
        match record {
            Record::Header(h) => {
                if header.replace(h).is_some() || n != 0 {
                    return Err(FormatError::invalid("record_order", "header must be the single first record"));
                }
            }
            _ if header.is_none() => {
                return Err(FormatError::invalid("record_order", "log must start with a header record"));
            }
            Record::Event(e) => events.push(e),
            Record::Track(t) => tracks.push(t),
            Record::Prediction(p) => predictions.push(p),
            Record::Summary(s) => summary = Some(s),
        }
    }
    let log = ScenarioLog {
        header: header.ok_or_else(|| FormatError::invalid("record_order", "missing header record"))?,
        summary: summary.ok_or_else(|| FormatError::invalid("record_order", "missing summary record"))?,
        events,
        tracks,
        predictions,
    };
    log.validate()?;
    Ok(log)
}

pub fn write_log(log: &ScenarioLog) -> Result<Vec<u8>, FormatError> {
    log.validate()?;
    let mut out = Vec::new();
    let mut line = |r: &Record| {
        serde_json::to_writer(&mut out, r).expect("in-memory serialization of plain data cannot fail");
        out.push(b'\n');
    };
    line(&Record::Header(log.header.clone()));
    for e in &log.events {
        line(&Record::Event(e.clone()));
    }
    for t in &log.tracks {
        line(&Record::Track(t.clone()));
    }
    for p in &log.predictions {
        line(&Record::Prediction(p.clone()));
    }
    line(&Record::Summary(log.summary.clone()));
    Ok(out)
}
