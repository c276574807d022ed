use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{ensure_finite, from_json, to_canonical_json, FormatError};
use crate::rotmath::EulerXYZ;

/// Playback rate of every retargeted clip.
pub const CLIP_FPS: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipFrame {
    /// World root position in the target frame, meters.
    pub root_position: Vector3<f64>,
    pub root_euler: EulerXYZ,
    pub joints: Vec<EulerXYZ>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetargetedClip {
    pub id: String,
    pub fps: f64,
    pub joint_names: Vec<String>,
    pub frames: Vec<ClipFrame>,
    /// One entry per frame; set when any Euler extraction in the frame hit the gimbal fallback.
    pub gimbal_flags: Vec<bool>,
}

impl RetargetedClip {
    pub fn validate(&self) -> Result<(), FormatError> {
        if self.id.is_empty() {
            return Err(FormatError::invalid("empty_id", "clip id is empty"));
        }
        if self.fps != CLIP_FPS {
            return Err(FormatError::invalid("clip_fps", format!("clip fps must be {CLIP_FPS}, got {}", self.fps)));
        }
        if self.frames.is_empty() {
            return Err(FormatError::invalid("too_few_frames", "clip has no frames"));
        }
        if self.gimbal_flags.len() != self.frames.len() {
            return Err(FormatError::invalid(
                "gimbal_flags_length",
                format!("{} gimbal flags for {} frames", self.gimbal_flags.len(), self.frames.len()),
            ));
        }
        for (i, frame) in self.frames.iter().enumerate() {
            if frame.joints.len() != self.joint_names.len() {
                return Err(FormatError::parse_at(
                    format!("frames[{i}].joints"),
                    Some(i),
                    format!("expected {} joints, found {}", self.joint_names.len(), frame.joints.len()),
                ));
            }
            let e = &frame.root_euler;
            ensure_finite(
                frame
                    .root_position
                    .iter()
                    .copied()
                    .chain([e.x, e.y, e.z])
                    .chain(frame.joints.iter().flat_map(|j| [j.x, j.y, j.z])),
                &format!("clip frame {i}"),
            )?;
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        (self.frames.len() - 1) as f64 / self.fps
    }
}

pub fn read_clip(bytes: &[u8]) -> Result<RetargetedClip, FormatError> {
    let clip: RetargetedClip = from_json(bytes)?;
    clip.validate()?;
    Ok(clip)
}

pub fn write_clip(clip: &RetargetedClip) -> Result<Vec<u8>, FormatError> {
    clip.validate()?;
    Ok(to_canonical_json(clip))
}
