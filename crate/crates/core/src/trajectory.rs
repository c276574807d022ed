//! Global root trajectories from root-local motion, resampling, behavior classes
//! and per-class displacement statistics.

use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{FormatError, MotionFrame, MotionSequence};
use crate::rotmath::{axis_angle_to_matrix, matrix_to_axis_angle, sixd_to_matrix, RotationError, RotationMatrix, SixD};

/// Forward axis of the source body frame.
pub const SOURCE_FORWARD: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);

/// Upsampling is refused beyond this factor of the source rate.
pub const MAX_UPSAMPLE_FACTOR: f64 = 10.0;

/// Number of samples in each class curve.
pub const STATS_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("frame {frame}: {source}")]
    Frame { frame: usize, source: RotationError },
    #[error("target rate {target} Hz is invalid for a {source_fps} Hz sequence: {reason}")]
    Rate { target: f64, source_fps: f64, reason: &'static str },
    #[error("invalid thresholds: need 0 < attempt_min ({attempt_min}) < cross_min ({cross_min})")]
    Thresholds { attempt_min: f64, cross_min: f64 },
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl TrajectoryError {
    pub fn code(&self) -> &'static str {
        match self {
            TrajectoryError::Frame { source, .. } => source.code(),
            TrajectoryError::Rate { .. } => "invalid_rate",
            TrajectoryError::Thresholds { .. } => "invalid_thresholds",
            TrajectoryError::Format(e) => e.code(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFrame {
    pub position: Vector3<f64>,
    pub orientation: RotationMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalTrajectory {
    pub id: String,
    pub fps: f64,
    pub frames: Vec<TrajectoryFrame>,
}

impl GlobalTrajectory {
    pub fn positions(&self) -> impl Iterator<Item = &Vector3<f64>> {
        self.frames.iter().map(|f| &f.position)
    }

    /// Unit forward direction of the root at frame 0.
    pub fn initial_heading(&self) -> Vector3<f64> {
        self.frames[0].orientation.rotate(&SOURCE_FORWARD)
    }

    /// Displacement from frame 0 projected on the initial heading, per frame.
    pub fn forward_displacement(&self) -> Vec<f64> {
        let heading = self.initial_heading();
        let origin = self.frames[0].position;
        self.frames.iter().map(|f| (f.position - origin).dot(&heading)).collect()
    }
}

/// Rotates each root-local displacement into the world and sums them from `origin`.
///
/// Frame 0 sits at `origin`; its own displacement is not applied.
pub fn reconstruct_global(seq: &MotionSequence, origin: Vector3<f64>) -> Result<GlobalTrajectory, TrajectoryError> {
    let mut position = origin;
    let mut frames = Vec::with_capacity(seq.frames.len());
    for (i, frame) in seq.frames.iter().enumerate() {
        let orientation = sixd_to_matrix(&frame.root_6d).map_err(|source| TrajectoryError::Frame { frame: i, source })?;
        if i > 0 {
            position += orientation.rotate(&frame.root_vel);
        }
        frames.push(TrajectoryFrame { position, orientation });
    }
    Ok(GlobalTrajectory { id: seq.id.clone(), fps: seq.fps, frames })
}

fn lerp(a: &Vector3<f64>, b: &Vector3<f64>, u: f64) -> Vector3<f64> {
    a + (b - a) * u
}

/// Resamples to `target_hz`.
///
/// Rotations are interpolated along geodesics; root displacements are
/// recomputed from the interpolated world path so the total displacement is
/// preserved. When the duration is not a whole number of target frames the
/// last frame is held at the final source pose.
pub fn resample(seq: &MotionSequence, target_hz: f64) -> Result<MotionSequence, TrajectoryError> {
    if !(target_hz.is_finite() && target_hz > 0.0) {
        return Err(TrajectoryError::Rate { target: target_hz, source_fps: seq.fps, reason: "must be positive" });
    }
    if target_hz > MAX_UPSAMPLE_FACTOR * seq.fps {
        return Err(TrajectoryError::Rate {
            target: target_hz,
            source_fps: seq.fps,
            reason: "exceeds the 10x upsampling bound",
        });
    }
    seq.validate()?;
    if target_hz == seq.fps {
        return Ok(seq.clone());
    }

    let path = reconstruct_global(seq, Vector3::zeros())?;
    let last = seq.frames.len() - 1;
    let out_frames = ((last as f64 / seq.fps) * target_hz - 1e-9).ceil().max(1.0) as usize + 1;

    let mut frames: Vec<MotionFrame> = Vec::with_capacity(out_frames);
    let mut previous = path.frames[0].position;
    for k in 0..out_frames {
        let s = (k as f64 * seq.fps / target_hz).min(last as f64);
        let i0 = (s.floor() as usize).min(last);
        let frac = s - i0 as f64;
        let (root_6d, orientation, position, joints) = if frac == 0.0 {
            let src = &seq.frames[i0];
            (src.root_6d, path.frames[i0].orientation, path.frames[i0].position, src.joints.clone())
        } else {
            let (a, b) = (&seq.frames[i0], &seq.frames[i0 + 1]);
            let orientation = path.frames[i0].orientation.slerp(&path.frames[i0 + 1].orientation, frac);
            let position = lerp(&path.frames[i0].position, &path.frames[i0 + 1].position, frac);
            let joints = a
                .joints
                .iter()
                .zip(&b.joints)
                .map(|(ja, jb)| {
                    let ra = axis_angle_to_matrix(ja).map_err(|source| TrajectoryError::Frame { frame: i0, source })?;
                    let rb = axis_angle_to_matrix(jb)
                        .map_err(|source| TrajectoryError::Frame { frame: i0 + 1, source })?;
                    Ok(matrix_to_axis_angle(&ra.slerp(&rb, frac)))
                })
                .collect::<Result<Vec<_>, TrajectoryError>>()?;
            (SixD::from_rotation(&orientation), orientation, position, joints)
        };
        let root_vel = if k == 0 {
            seq.frames[0].root_vel
        } else {
            orientation.transpose().rotate(&(position - previous))
        };
        previous = position;
        frames.push(MotionFrame { root_6d, root_vel, joints });
    }
    Ok(MotionSequence { id: seq.id.clone(), fps: target_hz, annotation: seq.annotation.clone(), frames })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorClass {
    NotCrossing,
    Attempting,
    Crossing,
}

impl BehaviorClass {
    pub const ALL: [BehaviorClass; 3] = [BehaviorClass::NotCrossing, BehaviorClass::Attempting, BehaviorClass::Crossing];

    pub fn label(&self) -> &'static str {
        match self {
            BehaviorClass::NotCrossing => "not_crossing",
            BehaviorClass::Attempting => "attempting",
            BehaviorClass::Crossing => "crossing",
        }
    }
}

impl fmt::Display for BehaviorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Forward-displacement class boundaries in meters; lower bounds are inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassThresholds {
    pub attempt_min: f64,
    pub cross_min: f64,
}

impl Default for ClassThresholds {
    fn default() -> Self {
        ClassThresholds { attempt_min: 0.5, cross_min: 2.5 }
    }
}

impl ClassThresholds {
    pub fn new(attempt_min: f64, cross_min: f64) -> Result<Self, TrajectoryError> {
        let t = ClassThresholds { attempt_min, cross_min };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if 0.0 < self.attempt_min && self.attempt_min < self.cross_min && self.cross_min.is_finite() {
            Ok(())
        } else {
            Err(TrajectoryError::Thresholds { attempt_min: self.attempt_min, cross_min: self.cross_min })
        }
    }

    pub fn classify_displacement(&self, d: f64) -> BehaviorClass {
        if d < self.attempt_min {
            BehaviorClass::NotCrossing
        } else if d < self.cross_min {
            BehaviorClass::Attempting
        } else {
            BehaviorClass::Crossing
        }
    }
}

pub fn classify(traj: &GlobalTrajectory, th: &ClassThresholds) -> BehaviorClass {
    let d = traj.forward_displacement().last().copied().unwrap_or(0.0);
    th.classify_displacement(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCurves {
    pub class: BehaviorClass,
    pub count: usize,
    pub mean: Vec<f64>,
    /// Population variance per sample.
    pub variance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub samples: usize,
    pub classes: Vec<ClassCurves>,
    pub warnings: Vec<String>,
}

impl TrajectoryStats {
    pub fn class(&self, class: BehaviorClass) -> Option<&ClassCurves> {
        self.classes.iter().find(|c| c.class == class)
    }
}

/// Forward displacement resampled to `samples` points uniformly spaced in path arc length.
///
/// A path with zero arc length is parameterized by frame index instead.
pub fn arc_length_curve(traj: &GlobalTrajectory, samples: usize) -> Vec<f64> {
    let values = traj.forward_displacement();
    let n = values.len();
    if n == 1 || samples == 1 {
        return vec![values[0]; samples];
    }
    let mut param = Vec::with_capacity(n);
    let mut acc = 0.0;
    param.push(0.0);
    for w in traj.frames.windows(2) {
        acc += (w[1].position - w[0].position).norm();
        param.push(acc);
    }
    if acc > 0.0 {
        param.iter_mut().for_each(|p| *p /= acc);
    } else {
        param.iter_mut().enumerate().for_each(|(i, p)| *p = i as f64 / (n - 1) as f64);
    }
    (0..samples)
        .map(|k| {
            let s = k as f64 / (samples - 1) as f64;
            // last index with param <= s
            let i = param.partition_point(|p| *p <= s).saturating_sub(1).min(n - 2);
            let (p0, p1) = (param[i], param[i + 1]);
            if p1 <= p0 {
                values[i]
            } else {
                let u = ((s - p0) / (p1 - p0)).clamp(0.0, 1.0);
                values[i] + (values[i + 1] - values[i]) * u
            }
        })
        .collect()
}

/// Per-class mean and population variance of arc-length-resampled forward displacement.
pub fn class_stats(items: &[(GlobalTrajectory, BehaviorClass)], samples: usize) -> TrajectoryStats {
    let mut classes = Vec::new();
    let mut warnings = Vec::new();
    for class in BehaviorClass::ALL {
        let curves: Vec<Vec<f64>> = items
            .iter()
            .filter(|(_, c)| *c == class)
            .map(|(t, _)| arc_length_curve(t, samples))
            .collect();
        if curves.is_empty() {
            warnings.push(format!("class {class} has no trajectories; omitted"));
            continue;
        }
        let n = curves.len() as f64;
        let mean: Vec<f64> = (0..samples).map(|k| curves.iter().map(|c| c[k]).sum::<f64>() / n).collect();
        let variance = (0..samples)
            .map(|k| curves.iter().map(|c| (c[k] - mean[k]).powi(2)).sum::<f64>() / n)
            .collect();
        classes.push(ClassCurves { class, count: curves.len(), mean, variance });
    }
    TrajectoryStats { samples, classes, warnings }
}
