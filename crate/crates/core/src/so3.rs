//! Small-matrix rotation algebra on SO(3).
//!
//! [`Rotation`] is a validated 3×3 orthonormal matrix with determinant +1.
//! Construction from an arbitrary matrix checks the invariants at
//! [`ORTHONORMAL_TOL`]; matrices that drifted slightly (defect below
//! [`REPAIR_TOL`]) are snapped back onto SO(3) by polar decomposition.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Per-entry tolerance on `mᵀm = I` and on `det m = 1`.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Largest orthonormality defect that is silently repaired.
pub const REPAIR_TOL: f64 = 1e-6;

/// Angles below this are rounding noise of a product of unit-scale 3×3
/// matrices; [`Rotation::geodesic_dist`] reports them as exactly zero.
pub const ANGLE_RESOLUTION: f64 = 1e-12;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    // rem_euclid can land a hair above -π after the shift
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// A unit-length rotation axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitAxis(Vector3<f64>);

impl UnitAxis {
    /// Normalizes `v`. Fails on zero-length or non-finite input.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "axis must be finite and non-zero, got {v:?}"
            )));
        }
        Ok(UnitAxis(v / n))
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(Vector3::from(v))
    }

    pub fn x() -> Self {
        UnitAxis(Vector3::x())
    }

    pub fn y() -> Self {
        UnitAxis(Vector3::y())
    }

    pub fn z() -> Self {
        UnitAxis(Vector3::z())
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl Serialize for UnitAxis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitAxis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 3]>::deserialize(d)?;
        UnitAxis::from_array(v).map_err(serde::de::Error::custom)
    }
}

/// A proper rotation matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Validates `m`, repairing small drift by polar decomposition.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let defect = orthonormality_defect(&m);
        let det = m.determinant();
        if defect <= ORTHONORMAL_TOL && (det - 1.0).abs() <= ORTHONORMAL_TOL {
            return Ok(Rotation(m));
        }
        if defect < REPAIR_TOL && det > 0.0 {
            return Ok(Rotation(nearest_rotation(&m)));
        }
        Err(Error::NotARotation { defect, det })
    }

    /// Wraps `m` without checking. Callers guarantee `m ∈ SO(3)`.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    pub fn from_row_major(v: &[f64; 9]) -> Result<Self> {
        Self::from_matrix(Matrix3::from_row_slice(v))
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    /// Rodrigues rotation about `axis` by `angle` radians.
    pub fn axis_angle(axis: &UnitAxis, angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::InvalidArgument(format!("angle must be finite, got {angle}")));
        }
        Ok(Self::axis_angle_finite(axis, angle))
    }

    pub(crate) fn axis_angle_finite(axis: &UnitAxis, angle: f64) -> Self {
        let u = axis.0;
        let (s, c) = angle.sin_cos();
        let k = skew(&u);
        Rotation(Matrix3::identity() * c + k * s + (u * u.transpose()) * (1.0 - c))
    }

    /// Exponential map of a rotation vector (axis scaled by angle).
    pub fn exp(omega: &Vector3<f64>) -> Self {
        let theta = omega.norm();
        if theta < 1e-12 {
            // first-order, then re-project
            let m = Matrix3::identity() + skew(omega);
            return Rotation(nearest_rotation(&m));
        }
        Self::axis_angle_finite(&UnitAxis(omega / theta), theta)
    }

    /// Rotation from a (not necessarily normalized) quaternion `w + xi + yj + zk`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::InvalidArgument("quaternion must be non-zero".into()));
        }
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Ok(Rotation(Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// Matrix product `self · other`, re-validated.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let m = self.0 * other.0;
        if orthonormality_defect(&m) <= ORTHONORMAL_TOL {
            Rotation(m)
        } else {
            Rotation(nearest_rotation(&m))
        }
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `tr(selfᵀ · other)` without forming the product.
    pub fn trace_dot(&self, other: &Rotation) -> f64 {
        self.0.dot(&other.0)
    }

    /// Frobenius norm `‖self − target‖_F`.
    pub fn frobenius_dist_to(&self, target: &Rotation) -> f64 {
        (self.0 - target.0).norm()
    }

    /// Angle of the relative rotation `selfᵀ·other`, in `[0, π]`.
    ///
    /// Evaluated as `atan2(sin θ, cos θ)` from the skew and trace parts, which
    /// equals `arccos((tr − 1)/2)` but keeps full precision near 0 and π.
    pub fn geodesic_dist(&self, other: &Rotation) -> f64 {
        let d = self.0.transpose() * other.0;
        let cos = ((d.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let sin = 0.5
            * Vector3::new(
                d[(2, 1)] - d[(1, 2)],
                d[(0, 2)] - d[(2, 0)],
                d[(1, 0)] - d[(0, 1)],
            )
            .norm();
        let theta = sin.atan2(cos);
        if theta < ANGLE_RESOLUTION {
            0.0
        } else {
            theta
        }
    }

    /// Rotation vector (log map), angle in `[0, π]`.
    pub fn log(&self) -> Vector3<f64> {
        let d = &self.0;
        let theta = Rotation::identity().geodesic_dist(self);
        let v = Vector3::new(
            d[(2, 1)] - d[(1, 2)],
            d[(0, 2)] - d[(2, 0)],
            d[(1, 0)] - d[(0, 1)],
        );
        if theta < 1e-9 {
            return v * 0.5;
        }
        if PI - theta < 1e-6 {
            // axis from the symmetric part: (R + I)/2 = u uᵀ near a half-turn
            let b = (d + Matrix3::identity()) * 0.5;
            let col = (0..3)
                .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
                .unwrap_or(0);
            let mut u = b.column(col).into_owned();
            u /= u.norm();
            if u.dot(&v) < 0.0 {
                u = -u;
            }
            return u * theta;
        }
        v * (theta / (2.0 * theta.sin()))
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

impl Mul for &Rotation {
    type Output = Rotation;

    fn mul(self, rhs: &Rotation) -> Rotation {
        self.compose(rhs)
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        for i in 0..3 {
            writeln!(f, "[{:+.6} {:+.6} {:+.6}]", m[(i, 0)], m[(i, 1)], m[(i, 2)])?;
        }
        Ok(())
    }
}

/// Uniform (Haar) random rotation via a normalized 4-D Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(r) = Rotation::from_quaternion(q[0], q[1], q[2], q[3]) {
            return r;
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RotationRepr {
    RowMajor([f64; 9]),
    AxisAngle { axis: [f64; 3], angle_rad: f64 },
}

impl Serialize for Rotation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RotationRepr::deserialize(d)? {
            RotationRepr::RowMajor(v) => Rotation::from_row_major(&v),
            RotationRepr::AxisAngle { axis, angle_rad } => {
                UnitAxis::from_array(axis).and_then(|a| Rotation::axis_angle(&a, angle_rad))
            }
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Rotation plus translation.
///
/// Symmetries act on the left of `r`: a model point `x` appears in the camera
/// frame at `rᵀ·x + t`, so the pose `(S·r, t)` places the point `Sᵀx` where
/// `(r, t)` places `x`. For a model invariant under `S`, both poses render
/// the same point set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    #[serde(rename = "rotation")]
    pub r: Rotation,
    #[serde(rename = "translation", with = "vec3_serde")]
    pub t: Vector3<f64>,
}

impl RigidMotion {
    pub fn new(r: Rotation, t: Vector3<f64>) -> Self {
        RigidMotion { r, t }
    }

    /// Camera-frame position of model point `x`.
    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.r.matrix().tr_mul(x) + self.t
    }
}

pub(crate) mod vec3_serde {
    use nalgebra::Vector3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector3<f64>, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        if a.iter().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("vector entries must be finite"));
        }
        Ok(Vector3::from(a))
    }
}

pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn orthonormality_defect(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).amax()
}

/// Closest rotation in Frobenius norm (polar factor with det fixed to +1).
pub fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Matrix3::identity(),
    };
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    u * d * v_t
}
