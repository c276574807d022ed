//! Safety metrics over scenario logs: collision rate, injury risk, false
//! braking and forecast error.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{from_json, to_canonical_json, EventKind, FormatError, ScenarioLog, ScenarioSpec};

pub const PMAIS3_INTERCEPT: f64 = 3.164;
pub const PMAIS3_SLOPE: f64 = 0.288;
/// Seconds before and after a braking onset searched for a crossing.
pub const FPBR_WINDOW: (f64, f64) = (1.0, 3.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("impact speed must be non-negative and finite, got {0}")]
    NegativeSpeed(f64),
    #[error("distance driven is zero; collision rate undefined")]
    ZeroDistance,
    #[error("prediction at tick {tick} references unknown pedestrian `{ped}`")]
    UnknownPedestrian { ped: String, tick: u64 },
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::NegativeSpeed(_) => "negative_speed",
            MetricsError::ZeroDistance => "zero_distance",
            MetricsError::UnknownPedestrian { .. } => "unknown_pedestrian",
            MetricsError::Mismatch(_) => "mismatched_inputs",
            MetricsError::Format(e) => e.code(),
        }
    }
}

/// Probability of an AIS 3+ injury at pedestrian impact speed `v` (m/s).
pub fn p_mais3(v: f64) -> Result<f64, MetricsError> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(MetricsError::NegativeSpeed(v));
    }
    Ok(1.0 / (1.0 + (PMAIS3_INTERCEPT - PMAIS3_SLOPE * v).exp()))
}

pub fn collisions_per_km(log: &ScenarioLog, distance_km: f64) -> Result<f64, MetricsError> {
    if distance_km.is_nan() || distance_km <= 0.0 {
        return Err(MetricsError::ZeroDistance);
    }
    Ok(log.events_of(EventKind::Collision).count() as f64 / distance_km)
}

/// Closed `[enter, exit]` intervals per pedestrian; an unmatched enter runs to the end of the log.
pub fn crossing_intervals(log: &ScenarioLog) -> Vec<(f64, f64)> {
    let mut open: BTreeMap<&str, f64> = BTreeMap::new();
    let mut out = Vec::new();
    for e in &log.events {
        let Some(ped) = e.agents.first() else { continue };
        match e.kind {
            EventKind::CrossingEnter => {
                open.entry(ped.as_str()).or_insert(e.t);
            }
            EventKind::CrossingExit => {
                if let Some(start) = open.remove(ped.as_str()) {
                    out.push((start, e.t));
                }
            }
            _ => {}
        }
    }
    out.extend(open.into_values().map(|start| (start, log.summary.t_end)));
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

fn false_positive_brakes(log: &ScenarioLog) -> (usize, usize) {
    let crossings = crossing_intervals(log);
    let mut total = 0;
    let mut fp = 0;
    for e in log.events_of(EventKind::BrakeStart) {
        total += 1;
        let (lo, hi) = (e.t - FPBR_WINDOW.0, e.t + FPBR_WINDOW.1);
        if !crossings.iter().any(|(a, b)| *a <= hi && *b >= lo) {
            fp += 1;
        }
    }
    (fp, total)
}

/// Share of braking onsets with no crossing interval touching `[t − 1 s, t + 3 s]`; 0 without braking.
pub fn fpbr(log: &ScenarioLog) -> f64 {
    match false_positive_brakes(log) {
        (_, 0) => 0.0,
        (fp, total) => fp as f64 / total as f64,
    }
}

fn ade_terms(log: &ScenarioLog) -> Result<(f64, usize), MetricsError> {
    let truth: HashMap<(&str, u64), [f64; 2]> =
        log.tracks.iter().map(|t| ((t.ped.as_str(), t.tick), t.position)).collect();
    let known: BTreeSet<&str> = log.tracks.iter().map(|t| t.ped.as_str()).collect();
    let mut sum = 0.0;
    let mut n = 0;
    for p in &log.predictions {
        if !known.contains(p.ped.as_str()) {
            return Err(MetricsError::UnknownPedestrian { ped: p.ped.clone(), tick: p.tick });
        }
        for (k, q) in p.points.iter().enumerate() {
            if let Some(g) = truth.get(&(p.ped.as_str(), p.tick + k as u64 + 1)) {
                sum += (q[0] - g[0]).hypot(q[1] - g[1]);
                n += 1;
            }
        }
    }
    Ok((sum, n))
}

/// Mean Euclidean error over every predicted point that has a ground-truth
/// sample; `None` when the log carries no such point.
pub fn ade(log: &ScenarioLog) -> Result<Option<f64>, MetricsError> {
    let (sum, n) = ade_terms(log)?;
    Ok((n > 0).then(|| sum / n as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub scenario_id: String,
    pub seed: u64,
    pub planner: String,
    pub distance_km: f64,
    pub route_completion: f64,
    pub collisions: usize,
    pub collisions_per_km: Option<f64>,
    pub impact_speeds: Vec<f64>,
    pub mean_pmais3: f64,
    pub braking_events: usize,
    pub false_positive_brakes: usize,
    pub fpbr: f64,
    pub crossings: usize,
    pub ade: Option<f64>,
    pub ade_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub collisions_per_km: f64,
    pub mean_pmais3: f64,
    pub fpbr: f64,
    pub ade: Option<f64>,
    pub collisions: usize,
    pub braking_events: usize,
    pub crossings: usize,
    pub distance_km: f64,
    pub runs: Vec<RunMetrics>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn run_metrics(log: &ScenarioLog, spec: &ScenarioSpec) -> Result<RunMetrics, MetricsError> {
    if log.header.scenario_id != spec.id {
        return Err(MetricsError::Mismatch(format!(
            "log for `{}` paired with spec `{}`",
            log.header.scenario_id, spec.id
        )));
    }
    let distance_km = log.distance_km();
    let impact_speeds: Vec<f64> = log.events_of(EventKind::Collision).map(|e| e.impact_speed.unwrap_or(0.0)).collect();
    let risks = impact_speeds.iter().map(|v| p_mais3(*v)).collect::<Result<Vec<_>, _>>()?;
    let (fp, braking) = false_positive_brakes(log);
    let (ade_sum, ade_points) = ade_terms(log)?;
    Ok(RunMetrics {
        scenario_id: spec.id.clone(),
        seed: log.header.seed,
        planner: log.header.planner.clone(),
        distance_km,
        route_completion: (log.summary.distance_m / spec.route_length()).min(1.0),
        collisions: impact_speeds.len(),
        collisions_per_km: (distance_km > 0.0).then(|| impact_speeds.len() as f64 / distance_km),
        mean_pmais3: mean(&risks),
        impact_speeds,
        braking_events: braking,
        false_positive_brakes: fp,
        fpbr: if braking == 0 { 0.0 } else { fp as f64 / braking as f64 },
        crossings: crossing_intervals(log).len(),
        ade: (ade_points > 0).then(|| ade_sum / ade_points as f64),
        ade_points,
    })
}

/// Pools all runs: collisions over total distance, pMAIS3+ over all
/// collisions, FPBR over all braking onsets and ADE over all predicted points.
/// Runs are ordered by scenario id and seed first, so input order is irrelevant.
pub fn report(logs: &[ScenarioLog], specs: &[ScenarioSpec]) -> Result<MetricsReport, MetricsError> {
    if logs.len() != specs.len() {
        return Err(MetricsError::Mismatch(format!("{} logs but {} specs", logs.len(), specs.len())));
    }
    let by_id: HashMap<&str, &ScenarioSpec> = specs.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut runs = logs
        .iter()
        .map(|log| {
            let spec = by_id.get(log.header.scenario_id.as_str()).ok_or_else(|| {
                MetricsError::Mismatch(format!("no spec for scenario `{}`", log.header.scenario_id))
            })?;
            run_metrics(log, spec)
        })
        .collect::<Result<Vec<_>, _>>()?;
    runs.sort_by(|a, b| (&a.scenario_id, a.seed, &a.planner).cmp(&(&b.scenario_id, b.seed, &b.planner)));

    let distance_km: f64 = runs.iter().map(|r| r.distance_km).sum();
    let collisions: usize = runs.iter().map(|r| r.collisions).sum();
    let collisions_per_km = match (collisions, distance_km > 0.0) {
        (0, _) => 0.0,
        (_, true) => collisions as f64 / distance_km,
        (_, false) => return Err(MetricsError::ZeroDistance),
    };
    let risks = runs.iter().flat_map(|r| &r.impact_speeds).map(|v| p_mais3(*v)).collect::<Result<Vec<_>, _>>()?;
    let braking_events: usize = runs.iter().map(|r| r.braking_events).sum();
    let fp: usize = runs.iter().map(|r| r.false_positive_brakes).sum();
    let ade_points: usize = runs.iter().map(|r| r.ade_points).sum();
    let ade_sum: f64 = runs.iter().filter_map(|r| r.ade.map(|a| a * r.ade_points as f64)).sum();
    let models: BTreeSet<&str> = runs.iter().map(|r| r.planner.as_str()).collect();
    Ok(MetricsReport {
        model: models.into_iter().collect::<Vec<_>>().join("+"),
        collisions_per_km,
        mean_pmais3: mean(&risks),
        fpbr: if braking_events == 0 { 0.0 } else { fp as f64 / braking_events as f64 },
        ade: (ade_points > 0).then(|| ade_sum / ade_points as f64),
        collisions,
        braking_events,
        crossings: runs.iter().map(|r| r.crossings).sum(),
        distance_km,
        runs,
    })
}

pub fn read_report(bytes: &[u8]) -> Result<MetricsReport, MetricsError> {
    Ok(from_json(bytes)?)
}

pub fn write_report(r: &MetricsReport) -> Vec<u8> {
    to_canonical_json(r)
}

pub const CSV_HEADER: &str = "model,collisions_per_km,pmais3_percent,fpbr,ade";

/// Summary table row(s); absent ADE is written as `-`.
pub fn reports_to_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let ade = r.ade.map_or("-".to_string(), |a| format!("{a:.4}"));
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{}\n",
            r.model,
            r.collisions_per_km,
            r.mean_pmais3 * 100.0,
            r.fpbr,
            ade
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_values() {
        let oracle = |v: f64| 1.0 / (1.0 + (3.164 - 0.288 * v).exp());
        assert_eq!(p_mais3(0.0).unwrap(), oracle(0.0));
        assert!((p_mais3(3.164 / 0.288).unwrap() - 0.5).abs() < 1e-9);
        assert!((p_mais3(0.0).unwrap() - 0.040_543_169_607_481_07).abs() < 1e-12);
        assert_eq!(p_mais3(-1.0).unwrap_err().code(), "negative_speed");
        assert!(p_mais3(f64::NAN).is_err());
    }

    #[test]
    fn csv_marks_missing_ade() {
        let r = MetricsReport {
            model: "m".into(),
            collisions_per_km: 4.0,
            mean_pmais3: 0.5,
            fpbr: 0.25,
            ade: None,
            collisions: 2,
            braking_events: 4,
            crossings: 1,
            distance_km: 0.5,
            runs: vec![],
        };
        assert_eq!(reports_to_csv(&[r]), format!("{CSV_HEADER}\nm,4.0000,50.0000,0.2500,-\n"));
    }
}
