//! Source-skeleton axis-angle poses to target-skeleton Euler joint angles.
//!
//! Per target joint: exponential map of each source joint in its chain,
//! change of basis by the map's frame transform, chain product, centering on
//! the target rest rotation, then intrinsic-XYZ Euler extraction.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use thiserror::Error;

use crate::io::skeleton::SMPL_BODY_JOINTS;
use crate::io::{ClipFrame, FormatError, JointMapping, MotionSequence, RetargetedClip, SkeletonMap, CLIP_FPS};
use crate::rotmath::{
    axis_angle_to_matrix, compose_chain, conjugate, matrix_to_euler_xyz, rest_relative, AxisAngle, EulerXYZ,
    FrameTransform, RotationError, RotationMatrix,
};
use crate::trajectory::{reconstruct_global, resample, TrajectoryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetargetError {
    #[error("pose has {found} joints but the skeleton map expects {expected}")]
    JointCount { expected: usize, found: usize },
    #[error("joint `{joint}`: {source}")]
    Joint { joint: String, source: RotationError },
    #[error("frame {frame}: {source}")]
    Frame { frame: usize, source: Box<RetargetError> },
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl RetargetError {
    pub fn code(&self) -> &'static str {
        match self {
            RetargetError::JointCount { .. } => "joint_count",
            RetargetError::Joint { source, .. } | RetargetError::Rotation(source) => source.code(),
            RetargetError::Frame { source, .. } => source.code(),
            RetargetError::Trajectory(e) => e.code(),
            RetargetError::Format(e) => e.code(),
        }
    }
}

/// Left-to-right product of the chain, proximal first.
pub fn merge_chain(rots: &[RotationMatrix]) -> Result<RotationMatrix, RetargetError> {
    Ok(compose_chain(rots)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameRetarget {
    pub joints: Vec<EulerXYZ>,
    /// Merged target-frame rotation per target joint, before rest centering.
    pub merged: Vec<RotationMatrix>,
    pub gimbal_locked: bool,
}

fn merged_joint(
    joint_aas: &[AxisAngle],
    mapping: &JointMapping,
    transform: &FrameTransform,
) -> Result<RotationMatrix, RetargetError> {
    let chain = mapping
        .sources
        .iter()
        .map(|&s| {
            axis_angle_to_matrix(&joint_aas[s])
                .map(|r| conjugate(&r, transform))
                .map_err(|source| RetargetError::Joint { joint: mapping.target.clone(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    compose_chain(&chain).map_err(|source| RetargetError::Joint { joint: mapping.target.clone(), source })
}

/// Retargets one pose. `joint_aas` is indexed by source joint.
pub fn retarget_frame(joint_aas: &[AxisAngle], map: &SkeletonMap) -> Result<FrameRetarget, RetargetError> {
    if joint_aas.len() != map.source_joint_count {
        return Err(RetargetError::JointCount { expected: map.source_joint_count, found: joint_aas.len() });
    }
    let mut joints = Vec::with_capacity(map.joints.len());
    let mut merged = Vec::with_capacity(map.joints.len());
    let mut gimbal_locked = false;
    for mapping in &map.joints {
        let r = merged_joint(joint_aas, mapping, &map.transform)?;
        let euler = matrix_to_euler_xyz(&rest_relative(&mapping.rest, &r));
        gimbal_locked |= euler.gimbal_locked;
        joints.push(euler.angles);
        merged.push(r);
    }
    Ok(FrameRetarget { joints, merged, gimbal_locked })
}

/// Converts a whole sequence, resampling to the clip rate first if needed.
///
/// The root path comes from [`reconstruct_global`] with the origin as start,
/// mapped into the target frame together with the root orientation.
pub fn retarget_clip(seq: &MotionSequence, map: &SkeletonMap) -> Result<RetargetedClip, RetargetError> {
    map.validate()?;
    seq.validate()?;
    let resampled;
    let seq = if seq.fps == CLIP_FPS {
        seq
    } else {
        resampled = resample(seq, CLIP_FPS)?;
        &resampled
    };
    let traj = reconstruct_global(seq, Vector3::zeros())?;
    let c = &map.transform;
    let mut frames = Vec::with_capacity(seq.frames.len());
    let mut gimbal_flags = Vec::with_capacity(seq.frames.len());
    for (i, (frame, root)) in seq.frames.iter().zip(&traj.frames).enumerate() {
        let pose = retarget_frame(&frame.joints, map)
            .map_err(|e| RetargetError::Frame { frame: i, source: Box::new(e) })?;
        let root_euler = matrix_to_euler_xyz(&conjugate(&root.orientation, c));
        gimbal_flags.push(pose.gimbal_locked || root_euler.gimbal_locked);
        frames.push(ClipFrame { root_position: c.apply(&root.position), root_euler: root_euler.angles, joints: pose.joints });
    }
    Ok(RetargetedClip { id: seq.id.clone(), fps: CLIP_FPS, joint_names: map.target_names(), frames, gimbal_flags })
}

/// Reference map from the 22 SMPL body joints to a simplified target rig.
///
/// The pelvis is carried by the clip's root transform. `Spine1` merges SMPL
/// `spine2` and `spine3`. Rest rotations are a synthetic T-pose in the target
/// frame (x forward, y right, z up): arms raised sideways, legs hanging down.
pub fn default_skeleton_map() -> SkeletonMap {
    let ident = RotationMatrix::identity();
    let rx = RotationMatrix::about_x;
    let ry = RotationMatrix::about_y;
    let rz = RotationMatrix::about_z;
    let entries: [(&str, &[usize], RotationMatrix); 20] = [
        ("Spine", &[3], ident),
        ("Spine1", &[6, 9], ident),
        ("Neck", &[12], ident),
        ("Head", &[15], ident),
        ("LeftShoulder", &[13], rz(-FRAC_PI_2)),
        ("LeftArm", &[16], rz(-FRAC_PI_2) * rx(-FRAC_PI_2)),
        ("LeftForeArm", &[18], rx(-FRAC_PI_2)),
        ("LeftHand", &[20], rx(-FRAC_PI_2) * ry(0.2)),
        ("RightShoulder", &[14], rz(FRAC_PI_2)),
        ("RightArm", &[17], rz(FRAC_PI_2) * rx(FRAC_PI_2)),
        ("RightForeArm", &[19], rx(FRAC_PI_2)),
        ("RightHand", &[21], rx(FRAC_PI_2) * ry(0.2)),
        ("LeftUpLeg", &[1], rx(PI)),
        ("LeftLeg", &[4], rx(PI) * ry(0.05)),
        ("LeftFoot", &[7], ry(FRAC_PI_2)),
        ("LeftToeBase", &[10], ident),
        ("RightUpLeg", &[2], rx(PI)),
        ("RightLeg", &[5], rx(PI) * ry(0.05)),
        ("RightFoot", &[8], ry(FRAC_PI_2)),
        ("RightToeBase", &[11], ident),
    ];
    SkeletonMap {
        name: "default-target".into(),
        source_joint_count: SMPL_BODY_JOINTS.len(),
        source_joint_names: SMPL_BODY_JOINTS.iter().map(|s| s.to_string()).collect(),
        transform: FrameTransform::source_to_target(),
        joints: entries
            .into_iter()
            .map(|(target, sources, rest)| JointMapping { target: target.into(), sources: sources.to_vec(), rest })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{write_skeleton_map, read_skeleton_map, MotionFrame};
    use crate::rotmath::SixD;

    #[test]
    fn merge_chain_cases() {
        assert_eq!(merge_chain(&[]).unwrap_err().code(), "empty_chain");
        assert_eq!(merge_chain(&[RotationMatrix::identity()]).unwrap(), RotationMatrix::identity());
        let m = merge_chain(&[RotationMatrix::about_x(0.3), RotationMatrix::about_x(-1.1)]).unwrap();
        assert!(m.max_abs_diff(&RotationMatrix::about_x(-0.8)) < 1e-15);
    }

    #[test]
    fn default_map_is_valid_and_serializable() {
        let map = default_skeleton_map();
        map.validate().unwrap();
        let bytes = write_skeleton_map(&map).unwrap();
        assert_eq!(read_skeleton_map(&bytes).unwrap(), map);
        let spine1 = map.joints.iter().find(|j| j.target == "Spine1").unwrap();
        assert_eq!(spine1.sources, vec![6, 9]);
    }

    #[test]
    fn zero_pose_is_zero_output() {
        let map = default_skeleton_map();
        let out = retarget_frame(&vec![AxisAngle::zero(); 22], &map).unwrap();
        assert!(out.joints.iter().all(|e| e.is_zero()), "{:?}", out.joints);
        assert!(!out.gimbal_locked);
    }

    #[test]
    fn single_joint_quarter_turn() {
        let map = SkeletonMap {
            name: "one".into(),
            source_joint_count: 1,
            source_joint_names: vec![],
            transform: FrameTransform::identity(),
            joints: vec![JointMapping { target: "J".into(), sources: vec![0], rest: RotationMatrix::identity() }],
        };
        let out = retarget_frame(&[AxisAngle::new(FRAC_PI_2, 0.0, 0.0)], &map).unwrap();
        let e = out.joints[0];
        assert!((e.x - FRAC_PI_2).abs() < 1e-15 && e.y.abs() < 1e-15 && e.z.abs() < 1e-15);
    }

    #[test]
    fn joint_count_mismatch() {
        let err = retarget_frame(&[AxisAngle::zero(); 3], &default_skeleton_map()).unwrap_err();
        assert_eq!(err.code(), "joint_count");
    }

    #[test]
    fn non_finite_joint_names_target() {
        let mut pose = vec![AxisAngle::zero(); 22];
        pose[6] = AxisAngle::new(f64::INFINITY, 0.0, 0.0);
        match retarget_frame(&pose, &default_skeleton_map()).unwrap_err() {
            RetargetError::Joint { joint, .. } => assert_eq!(joint, "Spine1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_motion_clip_has_constant_root() {
        let frame = MotionFrame { root_6d: SixD::identity(), root_vel: Vector3::zeros(), joints: vec![AxisAngle::zero(); 22] };
        let seq = MotionSequence { id: "z".into(), fps: 20.0, annotation: String::new(), frames: vec![frame.clone(), frame] };
        let clip = retarget_clip(&seq, &default_skeleton_map()).unwrap();
        assert_eq!(clip.frames.len(), 2);
        assert_eq!(clip.frames[0].root_position, clip.frames[1].root_position);
        assert!(clip.frames.iter().all(|f| f.joints.iter().all(|e| e.is_zero())));
        assert_eq!(clip.gimbal_flags, vec![false, false]);
    }
}
