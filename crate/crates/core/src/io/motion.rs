use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{ensure_finite, from_json, to_canonical_json, FormatError};
use crate::rotmath::{AxisAngle, SixD};

/// One source frame: root orientation, root-local per-frame displacement and joint rotations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionFrame {
    pub root_6d: SixD,
    /// Displacement over one frame interval, in the root's local frame (meters per frame).
    pub root_vel: Vector3<f64>,
    pub joints: Vec<AxisAngle>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSequence {
    pub id: String,
    pub fps: f64,
    pub annotation: String,
    pub frames: Vec<MotionFrame>,
}

impl MotionSequence {
    pub fn joint_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.joints.len())
    }

    pub fn duration(&self) -> f64 {
        (self.frames.len().saturating_sub(1)) as f64 / self.fps
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        if self.id.is_empty() {
            return Err(FormatError::invalid("empty_id", "motion id is empty"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(FormatError::invalid("nonpositive_fps", format!("fps must be positive, got {}", self.fps)));
        }
        if self.frames.len() < 2 {
            return Err(FormatError::invalid(
                "too_few_frames",
                format!("motion needs at least 2 frames, got {}", self.frames.len()),
            ));
        }
        let joints = self.joint_count();
        for (i, frame) in self.frames.iter().enumerate() {
            if frame.joints.len() != joints {
                return Err(FormatError::parse_at(
                    format!("frames[{i}].joints"),
                    Some(i),
                    format!("expected {joints} joints, found {}", frame.joints.len()),
                ));
            }
            ensure_finite(
                frame
                    .root_6d
                    .0
                    .iter()
                    .chain(frame.root_vel.iter())
                    .chain(frame.joints.iter().flat_map(|j| j.0.iter()))
                    .copied(),
                &format!("frame {i}"),
            )?;
        }
        Ok(())
    }
}

pub fn read_motion(bytes: &[u8]) -> Result<MotionSequence, FormatError> {
    let seq: MotionSequence = from_json(bytes)?;
    seq.validate()?;
    Ok(seq)
}

pub fn write_motion(seq: &MotionSequence) -> Result<Vec<u8>, FormatError> {
    seq.validate()?;
    Ok(to_canonical_json(seq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> MotionSequence {
        MotionSequence {
            id: "m0".into(),
            fps: 20.0,
            annotation: "a person walks forward".into(),
            frames: vec![
                MotionFrame { root_6d: SixD::identity(), root_vel: Vector3::zeros(), joints: vec![AxisAngle::zero()] },
                MotionFrame {
                    root_6d: SixD::identity(),
                    root_vel: Vector3::new(0.0, 0.0, 0.07),
                    joints: vec![AxisAngle::new(0.1, -0.2, 0.30000000000000004)],
                },
            ],
        }
    }

    const MINIMAL_DOC: &str = r#"{
  "id": "m0",
  "fps": 20.0,
  "annotation": "a person walks forward",
  "frames": [
    {"root_6d":[1.0,0.0,0.0,0.0,1.0,0.0],"root_vel":[0.0,0.0,0.0],"joints":[[0.0,0.0,0.0]]},
    {"root_6d":[1.0,0.0,0.0,0.0,1.0,0.0],"root_vel":[0.0,0.0,0.07],"joints":[[0.1,-0.2,0.30000000000000004]]}
  ]
}
"#;

    #[test]
    fn minimal_document_round_trips_byte_identically() {
        let seq = read_motion(MINIMAL_DOC.as_bytes()).unwrap();
        assert_eq!(seq, minimal());
        assert_eq!(write_motion(&seq).unwrap(), MINIMAL_DOC.as_bytes());
    }

    #[test]
    fn zero_fps_is_a_validation_error() {
        let doc = MINIMAL_DOC.replace("\"fps\": 20.0", "\"fps\": 0.0");
        assert_eq!(read_motion(doc.as_bytes()).unwrap_err().code(), "nonpositive_fps");
    }

    #[test]
    fn joint_count_mismatch_names_the_frame() {
        let mut seq = minimal();
        seq.frames[1].joints.push(AxisAngle::zero());
        seq.frames[1].joints.push(AxisAngle::zero());
        let doc = to_canonical_json(&seq);
        match read_motion(&doc).unwrap_err() {
            FormatError::Parse { field, frame, .. } => {
                assert_eq!(frame, Some(1));
                assert_eq!(field, "frames[1].joints");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors_carry_path() {
        let doc = MINIMAL_DOC.replace("[0.0,0.0,0.07]", "[0.0,0.07]");
        match read_motion(doc.as_bytes()).unwrap_err() {
            FormatError::Parse { field, frame, .. } => {
                assert_eq!(frame, Some(1));
                assert!(field.starts_with("frames[1].root_vel"), "{field}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_frame_rejected() {
        let mut seq = minimal();
        seq.frames.truncate(1);
        assert_eq!(write_motion(&seq).unwrap_err().code(), "too_few_frames");
    }
}
