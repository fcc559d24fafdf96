//! Rotation canonicalization for symmetric rigid objects.
//!
//! Rotations are identified up to the object's proper symmetry group, and
//! each equivalence class is mapped to a single representative. Two maps are
//! provided: [`map`], the plain nearest-to-identity choice, and
//! [`map_prime`], which first folds the rotation into one of a small number
//! of regions so the representative varies continuously inside each region.

pub mod canonical;
pub mod error;
pub mod metrics;
pub mod pnp;
pub mod so3;
pub mod symmetry;

pub use canonical::{
    discontinuity_witness, map, map_prime, map_prime_one_axis, map_prime_two_axes, map_to_region,
    map_revolution_angle, region_of, CanonicalPose, Region, RegionIndex, RevolutionAngle,
};
pub use error::{Error, Result};
pub use metrics::{adi, quotient_rotation_dist, ModelPoints};
pub use pnp::{
    pnp_solve, pnp_solve_detailed, project_corners, reprojection_jacobian, reprojection_residual,
    reprojection_residual_l1, Box3, Camera, Corners2D, PnpSolution,
};
pub use so3::{random_rotation, wrap_angle, RigidMotion, Rotation, UnitAxis};
pub use symmetry::{AxisOrder, SqrtGroup, SymmetryGroup, SymmetrySpec};
