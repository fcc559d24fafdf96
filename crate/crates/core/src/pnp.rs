//! Box-corner pose representation and its inverse.
//!
//! A pose is encoded as the pinhole projections of the 8 corners of the
//! object's 3D bounding box. [`pnp_solve`] recovers the pose from those 16
//! numbers with a normalized DLT followed by Gauss–Newton on the
//! reprojection error.
//!
//! Corner `i` sits at `(±hx, ±hy, ±hz)` with the sign of each coordinate
//! taken from bits 0, 1, 2 of `i` (bit set means `+`).

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, SMatrix, SVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{nearest_rotation, skew, RigidMotion, Rotation};

/// Smallest admissible camera-frame depth.
pub const MIN_DEPTH: f64 = 1e-6;

const MAX_ITERATIONS: usize = 50;
const CONVERGED_DELTA: f64 = 1e-12;
const MAX_GROWTH_STREAK: usize = 5;
const MAX_HALVINGS: usize = 12;

pub type Jacobian = SMatrix<f64, 16, 6>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Camera {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        let cam = Camera { fx, fy, cx, cy };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidArgument("principal point must be finite".into()));
        }
        Ok(())
    }

    /// Pixel coordinates of a camera-frame point.
    pub fn project(&self, p: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }

    /// Pixel to normalized image plane.
    pub fn normalize(&self, uv: &[f64; 2]) -> Vector2<f64> {
        Vector2::new((uv[0] - self.cx) / self.fx, (uv[1] - self.cy) / self.fy)
    }
}

/// Axis-aligned box centred on the model origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub half_extents: [f64; 3],
}

impl Box3 {
    pub fn new(hx: f64, hy: f64, hz: f64) -> Result<Self> {
        let b = Box3 {
            half_extents: [hx, hy, hz],
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "half extents must be positive, got {:?}",
                self.half_extents
            )))
        }
    }

    pub fn corner(&self, i: usize) -> Vector3<f64> {
        let [hx, hy, hz] = self.half_extents;
        let s = |bit: usize| if (i >> bit) & 1 == 1 { 1.0 } else { -1.0 };
        Vector3::new(s(0) * hx, s(1) * hy, s(2) * hz)
    }

    pub fn corners(&self) -> [Vector3<f64>; 8] {
        std::array::from_fn(|i| self.corner(i))
    }
}

/// Eight projected corners `(u, v)` in pixels, in corner-index order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corners2D(pub [[f64; 2]; 8]);

impl Corners2D {
    /// Row-major `[u0, v0, u1, v1, ...]`.
    pub fn to_flat(&self) -> [f64; 16] {
        std::array::from_fn(|k| self.0[k / 2][k % 2])
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() != 16 {
            return Err(Error::InvalidArgument(format!(
                "expected 16 corner coordinates, got {}",
                v.len()
            )));
        }
        let c = Corners2D(std::array::from_fn(|i| [v[2 * i], v[2 * i + 1]]));
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().flatten().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("corner coordinates must be finite".into()))
        }
    }

    /// Mean of the 8 points.
    pub fn centroid(&self) -> [f64; 2] {
        let (mut u, mut v) = (0.0, 0.0);
        for p in &self.0 {
            u += p[0];
            v += p[1];
        }
        [u / 8.0, v / 8.0]
    }
}

/// Pinhole projection of the 8 box corners under `pose`.
pub fn project_corners(cam: &Camera, bx: &Box3, pose: &RigidMotion) -> Result<Corners2D> {
    let mut out = [[0.0; 2]; 8];
    for (i, corner) in bx.corners().iter().enumerate() {
        let p = pose.apply(corner);
        if p.z <= MIN_DEPTH {
            return Err(Error::BehindCamera {
                corner: i,
                depth: p.z,
            });
        }
        let uv = cam.project(&p);
        out[i] = [uv.x, uv.y];
    }
    Ok(Corners2D(out))
}

fn residual_vector(
    cam: &Camera,
    bx: &Box3,
    pose: &RigidMotion,
    obs: &Corners2D,
) -> Result<SVector<f64, 16>> {
    let proj = project_corners(cam, bx, pose)?;
    Ok(SVector::from_fn(|k, _| proj.0[k / 2][k % 2] - obs.0[k / 2][k % 2]))
}

/// Root-mean-square over the 16 coordinates of `projected − observed`.
pub fn reprojection_residual(
    cam: &Camera,
    bx: &Box3,
    pose: &RigidMotion,
    obs: &Corners2D,
) -> Result<f64> {
    Ok((residual_vector(cam, bx, pose, obs)?.norm_squared() / 16.0).sqrt())
}

/// Mean absolute deviation over the 16 coordinates.
pub fn reprojection_residual_l1(
    cam: &Camera,
    bx: &Box3,
    pose: &RigidMotion,
    obs: &Corners2D,
) -> Result<f64> {
    Ok(residual_vector(cam, bx, pose, obs)?.abs().sum() / 16.0)
}

/// Applies a 6-vector `[ω, δt]` to `pose`.
///
/// The camera-from-model rotation `q = rᵀ` is updated on the left,
/// `q ← exp(ω)·q`, and `t ← t + δt`.
pub fn retract(pose: &RigidMotion, delta: &SVector<f64, 6>) -> RigidMotion {
    let omega = Vector3::new(delta[0], delta[1], delta[2]);
    let dt = Vector3::new(delta[3], delta[4], delta[5]);
    let r = pose.r * Rotation::exp(&omega).transpose();
    RigidMotion::new(r, pose.t + dt)
}

/// Derivative of the 16 projected coordinates with respect to [`retract`]'s
/// increment, evaluated at zero.
pub fn reprojection_jacobian(cam: &Camera, bx: &Box3, pose: &RigidMotion) -> Result<Jacobian> {
    let q = pose.r.matrix().transpose();
    let mut jac = Jacobian::zeros();
    for (i, corner) in bx.corners().iter().enumerate() {
        let rotated = q * corner;
        let p = rotated + pose.t;
        if p.z <= MIN_DEPTH {
            return Err(Error::BehindCamera {
                corner: i,
                depth: p.z,
            });
        }
        let iz = 1.0 / p.z;
        let dproj = nalgebra::Matrix2x3::new(
            cam.fx * iz,
            0.0,
            -cam.fx * p.x * iz * iz,
            0.0,
            cam.fy * iz,
            -cam.fy * p.y * iz * iz,
        );
        let d_omega = dproj * (-skew(&rotated));
        jac.fixed_view_mut::<2, 3>(2 * i, 0).copy_from(&d_omega);
        jac.fixed_view_mut::<2, 3>(2 * i, 3).copy_from(&dproj);
    }
    Ok(jac)
}

/// Result of [`pnp_solve_detailed`].
#[derive(Clone, Debug)]
pub struct PnpSolution {
    pub pose: RigidMotion,
    /// RMS reprojection residual of the DLT initialization.
    pub initial_residual: f64,
    /// RMS reprojection residual after refinement.
    pub final_residual: f64,
    pub iterations: usize,
    /// RMS residual at the initialization and after each accepted step.
    pub residual_trace: Vec<f64>,
}

/// Pose from the 8 observed box corners.
pub fn pnp_solve(cam: &Camera, bx: &Box3, obs: &Corners2D) -> Result<RigidMotion> {
    pnp_solve_detailed(cam, bx, obs).map(|s| s.pose)
}

pub fn pnp_solve_detailed(cam: &Camera, bx: &Box3, obs: &Corners2D) -> Result<PnpSolution> {
    cam.validate()?;
    bx.validate()?;
    obs.validate()?;
    let init = dlt(cam, bx, obs)?;
    let cost = |pose: &RigidMotion| {
        residual_vector(cam, bx, pose, obs)
            .map(|r| r.norm_squared())
            .unwrap_or(f64::INFINITY)
    };
    let mut best = init;
    let mut best_cost = cost(&init);
    if !best_cost.is_finite() {
        return Err(Error::DegenerateConfiguration(
            "linear initialization places corners behind the camera".into(),
        ));
    }
    let initial_residual = (best_cost / 16.0).sqrt();
    let mut residual_trace = vec![initial_residual];
    let mut growth_streak = 0;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let r = residual_vector(cam, bx, &best, obs)?;
        let j = reprojection_jacobian(cam, bx, &best)?;
        let jtj = j.transpose() * j;
        let jtr = j.transpose() * r;
        let Some(step) = jtj.cholesky().map(|c| c.solve(&(-jtr))) else {
            break;
        };
        let mut scale = 1.0;
        let mut accepted = None;
        for h in 0..=MAX_HALVINGS {
            let candidate = retract(&best, &(step * scale));
            let c = cost(&candidate);
            if h == 0 && c > best_cost {
                growth_streak += 1;
            } else if h == 0 {
                growth_streak = 0;
            }
            if c <= best_cost {
                accepted = Some((candidate, c));
                break;
            }
            scale *= 0.5;
        }
        if growth_streak >= MAX_GROWTH_STREAK {
            return Err(Error::NoConvergence {
                iterations,
                last: Box::new(best),
            });
        }
        let Some((candidate, c)) = accepted else {
            break;
        };
        let change = best_cost.sqrt() - c.sqrt();
        best = candidate;
        best_cost = c;
        residual_trace.push((c / 16.0).sqrt());
        if change < CONVERGED_DELTA {
            break;
        }
    }
    Ok(PnpSolution {
        pose: best,
        initial_residual,
        final_residual: (best_cost / 16.0).sqrt(),
        iterations,
        residual_trace,
    })
}

/// Normalized DLT for `[q | t]` (camera-from-model), then nearest rotation.
fn dlt(cam: &Camera, bx: &Box3, obs: &Corners2D) -> Result<RigidMotion> {
    let image: Vec<Vector2<f64>> = obs.0.iter().map(|uv| cam.normalize(uv)).collect();
    let world = bx.corners();

    let mean2 = image.iter().sum::<Vector2<f64>>() / 8.0;
    let rms2 = (image.iter().map(|p| (p - mean2).norm_squared()).sum::<f64>() / 8.0).sqrt();
    if rms2 < 1e-12 {
        return Err(Error::DegenerateConfiguration(
            "observed corners coincide".into(),
        ));
    }
    let s2 = std::f64::consts::SQRT_2 / rms2;
    let t2 = Matrix3::new(s2, 0.0, -s2 * mean2.x, 0.0, s2, -s2 * mean2.y, 0.0, 0.0, 1.0);

    let mean3 = world.iter().sum::<Vector3<f64>>() / 8.0;
    let rms3 = (world.iter().map(|p| (p - mean3).norm_squared()).sum::<f64>() / 8.0).sqrt();
    let s3 = 3f64.sqrt() / rms3;
    let mut t3 = Matrix4::identity() * s3;
    t3[(3, 3)] = 1.0;
    t3.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-s3 * mean3));

    let mut a = DMatrix::<f64>::zeros(16, 12);
    for i in 0..8 {
        let x = s2 * (image[i] - mean2);
        let w = s3 * (world[i] - mean3);
        let wh = [w.x, w.y, w.z, 1.0];
        for k in 0..4 {
            a[(2 * i, k)] = wh[k];
            a[(2 * i, 8 + k)] = -x.x * wh[k];
            a[(2 * i + 1, 4 + k)] = wh[k];
            a[(2 * i + 1, 8 + k)] = -x.y * wh[k];
        }
    }
    let mut svd = a.svd(false, true);
    svd.sort_by_singular_values();
    let sv = &svd.singular_values;
    // A null space of dimension > 1 leaves the projection undetermined.
    if sv[10] <= 1e-10 * sv[0] {
        return Err(Error::DegenerateConfiguration(
            "DLT design matrix is rank deficient".into(),
        ));
    }
    let v_t = svd.v_t.as_ref().expect("requested V");
    let p = v_t.row(11);
    let pn = Matrix3x4::from_fn(|r, c| p[4 * r + c]);
    let t2_inv = t2
        .try_inverse()
        .ok_or_else(|| Error::DegenerateConfiguration("singular normalization".into()))?;
    let mut proj = t2_inv * pn * t3;

    let mut m: Matrix3<f64> = proj.fixed_view::<3, 3>(0, 0).into_owned();
    if m.determinant() < 0.0 {
        proj = -proj;
        m = -m;
    }
    let scale = m.svd(false, false).singular_values.mean();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::DegenerateConfiguration("DLT scale is zero".into()));
    }
    let q = nearest_rotation(&(m / scale));
    let t = proj.column(3).into_owned() / scale;
    Ok(RigidMotion::new(Rotation::from_matrix_unchecked(q.transpose()), t))
}
