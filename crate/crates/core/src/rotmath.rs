//! Rotation representations used by trajectory reconstruction and retargeting.
//!
//! Every operation here is a pure function on small `Copy` values. Matrices are
//! stored as `nalgebra::Matrix3<f64>` but only ever leave this module through
//! [`RotationMatrix`], which guarantees orthonormality and `det = +1`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Orthonormality / determinant tolerance for accepting a matrix as a rotation.
pub const ROTATION_TOL: f64 = 1e-9;

/// Pitch distance from ±π/2 below which Euler extraction uses the gimbal fallback.
pub const GIMBAL_EPS: f64 = 1e-6;

/// Relative tolerance under which the two 6D columns are treated as parallel.
const SIXD_PARALLEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RotationError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not a rotation (orthonormality error {ortho:.3e}, det {det:.12})")]
    InvalidRotation { ortho: f64, det: f64 },
    #[error("degenerate 6D rotation: {0}")]
    Degenerate6d(&'static str),
    #[error("frame transform is not orthogonal or its determinant does not match handedness_flip")]
    InvalidTransform,
    #[error("rotation chain is empty")]
    EmptyChain,
}

impl RotationError {
    pub fn code(&self) -> &'static str {
        match self {
            RotationError::NonFinite(_) => "invalid_input",
            RotationError::InvalidRotation { .. } => "invalid_rotation",
            RotationError::Degenerate6d(_) => "degenerate_6d",
            RotationError::InvalidTransform => "invalid_transform",
            RotationError::EmptyChain => "empty_chain",
        }
    }
}

fn orthonormality_error(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Proper rotation in SO(3), row-major when serialized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[[f64; 3]; 3]", try_from = "[[f64; 3]; 3]")]
pub struct RotationMatrix(Matrix3<f64>);

impl Default for RotationMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates `m` as a rotation: finite, `mᵀm = I` and `det m = +1` within [`ROTATION_TOL`].
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, RotationError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(RotationError::NonFinite("rotation matrix"));
        }
        let ortho = orthonormality_error(&m);
        let det = m.determinant();
        if ortho > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(RotationError::InvalidRotation { ortho, det });
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self, RotationError> {
        Self::from_matrix(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn column(&self, i: usize) -> Vector3<f64> {
        self.0.column(i).into_owned()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let (sin_axis, cos) = self.sin_axis_and_cos();
        sin_axis.norm().atan2(cos)
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }

    /// Largest absolute element-wise difference.
    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        (self.0 - other.0).abs().max()
    }

    /// Geodesic interpolation: `self · exp(u · log(selfᵀ · other))`.
    pub fn slerp(&self, other: &RotationMatrix, u: f64) -> RotationMatrix {
        let delta = matrix_to_axis_angle(&(self.transpose() * *other));
        let step = exp_map(&(delta.0 * u));
        *self * step
    }

    fn sin_axis_and_cos(&self) -> (Vector3<f64>, f64) {
        let m = &self.0;
        let v = Vector3::new(
            m[(2, 1)] - m[(1, 2)],
            m[(0, 2)] - m[(2, 0)],
            m[(1, 0)] - m[(0, 1)],
        ) * 0.5;
        let cos = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        (v, cos)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

impl From<RotationMatrix> for [[f64; 3]; 3] {
    fn from(r: RotationMatrix) -> Self {
        r.rows()
    }
}

impl TryFrom<[[f64; 3]; 3]> for RotationMatrix {
    type Error = RotationError;

    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self, Self::Error> {
        RotationMatrix::from_rows(rows)
    }
}

/// Rotation vector: axis scaled by angle in radians.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AxisAngle(pub Vector3<f64>);

impl AxisAngle {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Equivalent rotation vector with angle in `[0, π]`.
    pub fn canonical(&self) -> AxisAngle {
        let angle = self.angle();
        if angle == 0.0 {
            return *self;
        }
        let axis = self.0 / angle;
        let wrapped = angle.rem_euclid(TAU);
        if wrapped > PI {
            AxisAngle(-axis * (TAU - wrapped))
        } else {
            AxisAngle(axis * wrapped)
        }
    }
}

/// First two columns of a rotation, stacked `[c0.x, c0.y, c0.z, c1.x, c1.y, c1.z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SixD(pub [f64; 6]);

impl SixD {
    pub fn identity() -> Self {
        SixD([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    }

    pub fn from_rotation(r: &RotationMatrix) -> Self {
        let m = r.matrix();
        SixD([
            m[(0, 0)],
            m[(1, 0)],
            m[(2, 0)],
            m[(0, 1)],
            m[(1, 1)],
            m[(2, 1)],
        ])
    }

    pub fn first(&self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn second(&self) -> Vector3<f64> {
        Vector3::new(self.0[3], self.0[4], self.0[5])
    }
}

/// Intrinsic X-then-Y-then-Z angles: `R = Rx(x) · Ry(y) · Rz(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct EulerXYZ {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EulerXYZ {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_matrix(&self) -> RotationMatrix {
        RotationMatrix::about_x(self.x) * RotationMatrix::about_y(self.y) * RotationMatrix::about_z(self.z)
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }
}

impl From<[f64; 3]> for EulerXYZ {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<EulerXYZ> for [f64; 3] {
    fn from(e: EulerXYZ) -> Self {
        [e.x, e.y, e.z]
    }
}

/// Result of [`matrix_to_euler_xyz`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerExtraction {
    pub angles: EulerXYZ,
    /// Set when the pitch was within [`GIMBAL_EPS`] of ±π/2 and the fallback was applied.
    pub gimbal_locked: bool,
}

/// Orthogonal change of basis between two coordinate frames.
///
/// `handedness_flip` must agree with the determinant: `-1` when set, `+1` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameTransformDoc", into = "FrameTransformDoc")]
pub struct FrameTransform {
    matrix: Matrix3<f64>,
    handedness_flip: bool,
}

#[derive(Serialize, Deserialize)]
struct FrameTransformDoc {
    matrix: [[f64; 3]; 3],
    handedness_flip: bool,
}

impl FrameTransform {
    pub fn new(matrix: Matrix3<f64>, handedness_flip: bool) -> Result<Self, RotationError> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(RotationError::NonFinite("frame transform"));
        }
        let expected_det = if handedness_flip { -1.0 } else { 1.0 };
        if orthonormality_error(&matrix) > ROTATION_TOL
            || (matrix.determinant() - expected_det).abs() > ROTATION_TOL
        {
            return Err(RotationError::InvalidTransform);
        }
        Ok(Self { matrix, handedness_flip })
    }

    pub fn from_rows(rows: [[f64; 3]; 3], handedness_flip: bool) -> Result<Self, RotationError> {
        Self::new(Matrix3::from_fn(|r, c| rows[r][c]), handedness_flip)
    }

    pub fn identity() -> Self {
        Self { matrix: Matrix3::identity(), handedness_flip: false }
    }

    /// Source body frame (x-left, y-up, z-forward, right-handed) to target frame
    /// (x-forward, y-right, z-up, left-handed).
    pub fn source_to_target() -> Self {
        Self {
            matrix: Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0),
            handedness_flip: true,
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn handedness_flip(&self) -> bool {
        self.handedness_flip
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.matrix;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * v
    }
}

impl TryFrom<FrameTransformDoc> for FrameTransform {
    type Error = RotationError;

    fn try_from(doc: FrameTransformDoc) -> Result<Self, Self::Error> {
        FrameTransform::from_rows(doc.matrix, doc.handedness_flip)
    }
}

impl From<FrameTransform> for FrameTransformDoc {
    fn from(t: FrameTransform) -> Self {
        FrameTransformDoc { matrix: t.rows(), handedness_flip: t.handedness_flip }
    }
}

fn exp_map(w: &Vector3<f64>) -> RotationMatrix {
    let theta = w.norm();
    let (a, b) = if theta < 1e-6 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        let half = (0.5 * theta).sin();
        (theta.sin() / theta, 2.0 * half * half / (theta * theta))
    };
    let k = hat(w);
    RotationMatrix(Matrix3::identity() + k * a + k * k * b)
}

/// Exponential map (Rodrigues formula) from a rotation vector to a rotation.
pub fn axis_angle_to_matrix(aa: &AxisAngle) -> Result<RotationMatrix, RotationError> {
    if !aa.is_finite() {
        return Err(RotationError::NonFinite("axis-angle"));
    }
    Ok(exp_map(&aa.0))
}

/// Flips `axis` so that its first component with magnitude above 1e-12 is positive.
fn canonical_axis_sign(axis: Vector3<f64>) -> Vector3<f64> {
    match axis.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => -axis,
        _ => axis,
    }
}

/// Logarithm map: rotation vector with angle in `[0, π]`.
///
/// For rotations by exactly π the axis sign is ambiguous; the axis whose first
/// nonzero component is positive is returned.
pub fn matrix_to_axis_angle(r: &RotationMatrix) -> AxisAngle {
    let (sin_axis, cos) = r.sin_axis_and_cos();
    let sin = sin_axis.norm();
    let theta = sin.atan2(cos);
    if sin == 0.0 && cos > 0.0 {
        return AxisAngle::zero();
    }
    if cos > 0.0 {
        return AxisAngle(sin_axis * (theta / sin));
    }
    // Near π the antisymmetric part vanishes; recover the axis from (R + Rᵀ)/2 - cos·I = (1 - cos)·nnᵀ.
    let m = r.matrix();
    let sym = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos;
    let mut best = 0;
    for i in 1..3 {
        if sym[(i, i)] > sym[(best, best)] {
            best = i;
        }
    }
    let mut axis = sym.column(best).into_owned();
    axis /= axis.norm();
    let along = axis.dot(&sin_axis);
    if sin > 1e-12 {
        if along < 0.0 {
            axis = -axis;
        }
    } else {
        axis = canonical_axis_sign(axis);
    }
    AxisAngle(axis * theta)
}

/// Gram–Schmidt projection of a 6D vector onto SO(3); the columns are `[b1, b2, b1 × b2]`.
pub fn sixd_to_matrix(r: &SixD) -> Result<RotationMatrix, RotationError> {
    if r.0.iter().any(|v| !v.is_finite()) {
        return Err(RotationError::NonFinite("6D rotation"));
    }
    let a1 = r.first();
    let a2 = r.second();
    let n1 = a1.norm();
    let n2 = a2.norm();
    if n1 == 0.0 {
        return Err(RotationError::Degenerate6d("first vector is zero"));
    }
    if n2 == 0.0 {
        return Err(RotationError::Degenerate6d("second vector is zero"));
    }
    let b1 = a1 / n1;
    let ortho = a2 - b1 * a2.dot(&b1);
    let n_ortho = ortho.norm();
    if n_ortho <= SIXD_PARALLEL_TOL * n2 {
        return Err(RotationError::Degenerate6d("vectors are parallel"));
    }
    let b2 = ortho / n_ortho;
    let b3 = b1.cross(&b2);
    Ok(RotationMatrix(Matrix3::from_columns(&[b1, b2, b3])))
}

/// Intrinsic XYZ Euler angles.
///
/// Away from gimbal lock the angles compose back to `r` to round-off. When the
/// pitch is within [`GIMBAL_EPS`] of ±π/2, the pitch is snapped to ±π/2, roll
/// (x) is fixed to zero, the residual goes into yaw (z) and the result is flagged.
pub fn matrix_to_euler_xyz(r: &RotationMatrix) -> EulerExtraction {
    let m = r.matrix();
    let cos_pitch = m[(0, 0)].hypot(m[(0, 1)]);
    let pitch = m[(0, 2)].atan2(cos_pitch);
    if FRAC_PI_2 - pitch.abs() <= GIMBAL_EPS {
        let y = FRAC_PI_2.copysign(m[(0, 2)]);
        let z = m[(1, 0)].atan2(m[(1, 1)]) + 0.0;
        return EulerExtraction { angles: EulerXYZ::new(0.0, y, z), gimbal_locked: true };
    }
    let x = (-m[(1, 2)]).atan2(m[(2, 2)]);
    let z = (-m[(0, 1)]).atan2(m[(0, 0)]);
    // `+ 0.0` folds negative zeros so identity extracts to literal zeros
    EulerExtraction { angles: EulerXYZ::new(x + 0.0, pitch + 0.0, z + 0.0), gimbal_locked: false }
}

/// Expresses `r` in the frame of `c`: `C · R · Cᵀ`.
pub fn conjugate(r: &RotationMatrix, c: &FrameTransform) -> RotationMatrix {
    if r.0 == Matrix3::identity() {
        return *r;
    }
    RotationMatrix(c.matrix * r.0 * c.matrix.transpose())
}

/// Centers `r` on a reference rest rotation: `R_refᵀ · R · R_ref`.
pub fn rest_relative(reference: &RotationMatrix, r: &RotationMatrix) -> RotationMatrix {
    if r.0 == Matrix3::identity() {
        return *r;
    }
    RotationMatrix(reference.0.transpose() * r.0 * reference.0)
}

/// Left-to-right product of a non-empty chain.
pub fn compose_chain(rots: &[RotationMatrix]) -> Result<RotationMatrix, RotationError> {
    let (first, rest) = rots.split_first().ok_or(RotationError::EmptyChain)?;
    Ok(rest.iter().fold(*first, |acc, r| acc * *r))
}
