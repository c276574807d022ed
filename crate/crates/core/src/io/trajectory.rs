use super::{ensure_finite, from_json, to_canonical_json, FormatError};
use crate::trajectory::GlobalTrajectory;

fn validate(traj: &GlobalTrajectory) -> Result<(), FormatError> {
    if !(traj.fps.is_finite() && traj.fps > 0.0) {
        return Err(FormatError::invalid("nonpositive_fps", format!("fps must be positive, got {}", traj.fps)));
    }
    if traj.frames.is_empty() {
        return Err(FormatError::invalid("too_few_frames", "trajectory has no frames"));
    }
    ensure_finite(traj.frames.iter().flat_map(|f| f.position.iter().copied()), "trajectory positions")
}

pub fn read_trajectory(bytes: &[u8]) -> Result<GlobalTrajectory, FormatError> {
    let traj: GlobalTrajectory = from_json(bytes)?;
    validate(&traj)?;
    Ok(traj)
}

pub fn write_trajectory(traj: &GlobalTrajectory) -> Result<Vec<u8>, FormatError> {
    validate(traj)?;
    Ok(to_canonical_json(traj))
}
