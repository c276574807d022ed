use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{from_json, to_canonical_json, FormatError};
use crate::rotmath::{FrameTransform, RotationMatrix};

/// SMPL body joints without hands, in SMPL index order.
pub const SMPL_BODY_JOINTS: [&str; 22] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
];

/// Target joint fed by an ordered chain of source joints, centered on `rest`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMapping {
    pub target: String,
    /// Source joint indices, proximal to distal; their rotations are multiplied left to right.
    pub sources: Vec<usize>,
    pub rest: RotationMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonMap {
    pub name: String,
    pub source_joint_count: usize,
    pub source_joint_names: Vec<String>,
    pub transform: FrameTransform,
    pub joints: Vec<JointMapping>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformDoc {
    matrix: [[f64; 3]; 3],
    handedness_flip: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    target: String,
    sources: Vec<usize>,
    rest: [[f64; 3]; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonMapDoc {
    name: String,
    source_joint_count: usize,
    #[serde(default)]
    source_joint_names: Vec<String>,
    transform: TransformDoc,
    joints: Vec<JointDoc>,
}

impl SkeletonMap {
    pub fn target_names(&self) -> Vec<String> {
        self.joints.iter().map(|j| j.target.clone()).collect()
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        if self.joints.is_empty() {
            return Err(FormatError::invalid("empty_map", "skeleton map has no target joints"));
        }
        if !self.source_joint_names.is_empty() && self.source_joint_names.len() != self.source_joint_count {
            return Err(FormatError::invalid(
                "source_names_length",
                format!("{} source names for {} source joints", self.source_joint_names.len(), self.source_joint_count),
            ));
        }
        let mut targets = BTreeSet::new();
        let mut used = BTreeSet::new();
        for joint in &self.joints {
            if !targets.insert(joint.target.as_str()) {
                return Err(FormatError::invalid("duplicate_target", format!("target `{}` listed twice", joint.target)));
            }
            if joint.sources.is_empty() {
                return Err(FormatError::invalid("empty_chain", format!("target `{}` has no source joint", joint.target)));
            }
            for &s in &joint.sources {
                if s >= self.source_joint_count {
                    return Err(FormatError::invalid(
                        "source_out_of_range",
                        format!("target `{}` references source {s} of {}", joint.target, self.source_joint_count),
                    ));
                }
                if !used.insert(s) {
                    return Err(FormatError::invalid(
                        "duplicate_source",
                        format!("source joint {s} is mapped to more than one target"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn from_doc(doc: SkeletonMapDoc) -> Result<Self, FormatError> {
        let transform = FrameTransform::from_rows(doc.transform.matrix, doc.transform.handedness_flip)
            .map_err(|e| FormatError::invalid("invalid_transform", e.to_string()))?;
        let joints = doc
            .joints
            .into_iter()
            .map(|j| {
                let rest = RotationMatrix::from_rows(j.rest).map_err(|e| {
                    FormatError::invalid("invalid_rest_rotation", format!("target `{}`: {e}", j.target))
                })?;
                Ok(JointMapping { target: j.target, sources: j.sources, rest })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let map = SkeletonMap {
            name: doc.name,
            source_joint_count: doc.source_joint_count,
            source_joint_names: doc.source_joint_names,
            transform,
            joints,
        };
        map.validate()?;
        Ok(map)
    }

    fn to_doc(&self) -> SkeletonMapDoc {
        SkeletonMapDoc {
            name: self.name.clone(),
            source_joint_count: self.source_joint_count,
            source_joint_names: self.source_joint_names.clone(),
            transform: TransformDoc { matrix: self.transform.rows(), handedness_flip: self.transform.handedness_flip() },
            joints: self
                .joints
                .iter()
                .map(|j| JointDoc { target: j.target.clone(), sources: j.sources.clone(), rest: j.rest.rows() })
                .collect(),
        }
    }
}

pub fn read_skeleton_map(bytes: &[u8]) -> Result<SkeletonMap, FormatError> {
    SkeletonMap::from_doc(from_json(bytes)?)
}

pub fn write_skeleton_map(map: &SkeletonMap) -> Result<Vec<u8>, FormatError> {
    map.validate()?;
    Ok(to_canonical_json(&map.to_doc()))
}
