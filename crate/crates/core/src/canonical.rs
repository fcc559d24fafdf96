//! Canonicalization of rotations under a symmetry group.
//!
//! [`map`] picks, for a rotation `R`, the group element `Ŝ` minimizing
//! `‖Ŝ⁻¹R − I‖_F` and returns `Ŝ⁻¹R`: equivalent rotations share one
//! canonical representative. For discrete groups the image of `map` has a
//! wrap-around seam where the canonical rotation jumps; [`map_prime`] splits
//! SO(3) along the half-step anchors of [`SqrtGroup`](crate::SqrtGroup) so
//! that every region is canonicalized without crossing a seam, and tags the
//! result with the region index.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::so3::{Rotation, UnitAxis};
use crate::symmetry::{SymmetryGroup, SymmetrySpec};

/// Two squared-Frobenius objectives closer than this are tied; the earlier
/// element in canonical group order wins.
pub const TIE_EPS: f64 = 1e-9;

/// Below this magnitude the revolution objective is flat in α.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// Region index: `δ ∈ {1, 2}` for one axis, `(δ₁, δ₂) ∈ {1, 2}²` for two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionIndex {
    Single(u8),
    Pair(u8, u8),
}

impl RegionIndex {
    /// Flat zero-based class: `δ − 1`, or `2(δ₁ − 1) + (δ₂ − 1)`.
    pub fn class_index(&self) -> usize {
        match *self {
            RegionIndex::Single(d) => d as usize - 1,
            RegionIndex::Pair(d1, d2) => 2 * (d1 as usize - 1) + (d2 as usize - 1),
        }
    }

    pub fn to_vec(&self) -> Vec<u8> {
        match *self {
            RegionIndex::Single(d) => vec![d],
            RegionIndex::Pair(d1, d2) => vec![d1, d2],
        }
    }
}

impl Serialize for RegionIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

/// Output of [`map`] / [`map_prime`]. Always `s_hat · canonical = R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CanonicalPose {
    pub canonical: Rotation,
    pub s_hat: Rotation,
    pub delta: Option<RegionIndex>,
    /// Revolution alignment hit the flat set; `s_hat` is the identity twist.
    pub degenerate: bool,
}

/// A cell of the `√M(O)` partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    /// Position of `anchor` in the group's `SqrtGroup::anchors`.
    pub index: usize,
    pub anchor: Rotation,
    pub delta: RegionIndex,
}

/// Optimal twist about a revolution axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RevolutionAngle {
    pub angle: f64,
    pub degenerate: bool,
}

/// A rotation `B` with `B·ẑ = axis`, built by Gram–Schmidt.
///
/// The helper vector is `x̂`, or `ŷ` when the axis is within ~25° of `x̂`,
/// so `B = I` for `axis = ẑ`.
pub fn change_of_basis(axis: &UnitAxis) -> Matrix3<f64> {
    let u = axis.as_vector();
    let helper = if u.x.abs() > 0.9 {
        Vector3::y()
    } else {
        Vector3::x()
    };
    let e1 = (helper - u * helper.dot(u)).normalize();
    let e2 = u.cross(&e1);
    Matrix3::from_columns(&[e1, e2, *u])
}

/// The twist `α̂` such that `R^axis_α̂` is closest to `r` in Frobenius norm.
///
/// In the frame where `axis = ẑ`, `tr(R_αᵀ r) = (r₁₁ + r₂₂) cos α + (r₂₁ − r₁₂) sin α + r₃₃`,
/// maximized at `α̂ = atan2(r₂₁ − r₁₂, r₁₁ + r₂₂)`. When both arguments
/// vanish (e.g. `r` is a half-turn about an axis perpendicular to `axis`)
/// every α is optimal; we return 0 and set `degenerate`.
pub fn map_revolution_angle(axis: &UnitAxis, r: &Rotation) -> RevolutionAngle {
    let b = change_of_basis(axis);
    let local = b.transpose() * r.matrix() * b;
    let c = local[(0, 0)] + local[(1, 1)];
    let s = local[(1, 0)] - local[(0, 1)];
    if c.hypot(s) < DEGENERATE_EPS {
        return RevolutionAngle {
            angle: 0.0,
            degenerate: true,
        };
    }
    RevolutionAngle {
        angle: s.atan2(c),
        degenerate: false,
    }
}

/// Index of the element `S` minimizing `‖Sᵀ·r − target‖_F`, ties to the earliest.
pub(crate) fn argmin_element(elements: &[Rotation], r: &Rotation, target: &Rotation) -> usize {
    // ‖Sᵀr − A‖² = 6 − 2 tr(Sᵀ r Aᵀ)
    let x = Rotation::from_matrix_unchecked(r.matrix() * target.matrix().transpose());
    earliest_max(elements.iter().map(|s| s.trace_dot(&x)))
}

/// Earliest index whose objective `6 − 2v` is within `TIE_EPS` of the minimum.
fn earliest_max(values: impl Iterator<Item = f64> + Clone) -> usize {
    let best = values.clone().fold(f64::NEG_INFINITY, f64::max);
    values
        .enumerate()
        .find(|(_, v)| 2.0 * (best - v) <= TIE_EPS)
        .map_or(0, |(i, _)| i)
}

/// Canonical representative of `r` under `g` (no region index).
pub fn map(g: &SymmetryGroup, r: &Rotation) -> CanonicalPose {
    if let Some(elements) = g.elements() {
        let i = argmin_element(elements, r, &Rotation::identity());
        let s_hat = elements[i];
        return CanonicalPose {
            canonical: s_hat.transpose() * *r,
            s_hat,
            delta: None,
            degenerate: false,
        };
    }
    if let Some(axis) = g.revolution_axis() {
        let a = map_revolution_angle(axis, r);
        let s_hat = Rotation::axis_angle_finite(axis, a.angle);
        return CanonicalPose {
            canonical: s_hat.transpose() * *r,
            s_hat,
            delta: None,
            degenerate: a.degenerate,
        };
    }
    // sphere: every rotation is equivalent to the identity
    CanonicalPose {
        canonical: Rotation::identity(),
        s_hat: *r,
        delta: None,
        degenerate: false,
    }
}

/// The `√M(O)` anchor nearest to `map(g, r).canonical`.
pub fn region_of(g: &SymmetryGroup, r: &Rotation) -> Result<Region> {
    let sq = g.sqrt_group()?;
    let c = map(g, r).canonical;
    let i = earliest_max(sq.anchors.iter().map(|a| a.trace_dot(&c)));
    Ok(Region {
        index: i,
        anchor: sq.anchors[i],
        delta: sq.labels[i],
    })
}

fn map_prime_partitioned(g: &SymmetryGroup, r: &Rotation) -> Result<CanonicalPose> {
    map_to_region(g, r, region_of(g, r)?.delta)
}

/// `r` expressed in the chart of region `delta`: `Ŝ` brings `r` nearest to
/// that region's representative, whatever region `r` itself falls in.
pub fn map_to_region(g: &SymmetryGroup, r: &Rotation, delta: RegionIndex) -> Result<CanonicalPose> {
    let sq = g.sqrt_group()?;
    let elements = g.elements().expect("partitioned groups are discrete");
    let (rep, _) = sq
        .representatives
        .iter()
        .find(|(_, label)| *label == delta)
        .ok_or_else(|| Error::InvalidArgument(format!("no region {:?} in this partition", delta.to_vec())))?;
    let s_hat = elements[argmin_element(elements, r, rep)];
    Ok(CanonicalPose {
        canonical: s_hat.transpose() * *r,
        s_hat,
        delta: Some(delta),
        degenerate: false,
    })
}

/// Region-aware canonicalization for a single symmetry axis of order `M ≥ 2`.
///
/// If the canonical rotation's nearest anchor lies in `M(O)` the result is
/// `Map(r)` with `δ = 1`; otherwise `Ŝ` is re-chosen to bring `r` nearest to
/// `R^u_{π/M}` and `δ = 2`.
pub fn map_prime_one_axis(g: &SymmetryGroup, r: &Rotation) -> Result<CanonicalPose> {
    match g.spec() {
        SymmetrySpec::Cyclic { order, .. } if *order >= 2 => map_prime_partitioned(g, r),
        SymmetrySpec::Cyclic { order, .. } => Err(Error::InvalidArgument(format!(
            "one-axis region partition needs order >= 2, got {order}"
        ))),
        other => Err(Error::UnsupportedKind {
            kind: other.kind_name(),
            reason: "one-axis partition needs a cyclic group".into(),
        }),
    }
}

/// Region-aware canonicalization for a two-factor group `[(u, M), (v, N)]`.
///
/// Regions are tested in the order `(1,1)`, `(2,1)`, `(1,2)`, with
/// `(2,2)` as the fallback; each is anchored at `I`, `R^u_{π/M}`,
/// `R^v_{π/N}`, `R^u_{π/M}·R^v_{π/N}` respectively.
pub fn map_prime_two_axes(g: &SymmetryGroup, r: &Rotation) -> Result<CanonicalPose> {
    match g.spec() {
        SymmetrySpec::MultiAxis { factors } if factors.len() == 2 => map_prime_partitioned(g, r),
        other => Err(Error::UnsupportedKind {
            kind: other.kind_name(),
            reason: "two-axis partition needs exactly two factors".into(),
        }),
    }
}

/// Dispatching `Map′`: partitions discrete groups, falls back to plain
/// [`map`] for revolution (continuous, nothing to split) and the trivial group.
pub fn map_prime(g: &SymmetryGroup, r: &Rotation) -> Result<CanonicalPose> {
    match g.spec() {
        SymmetrySpec::Cyclic { .. } => map_prime_one_axis(g, r),
        SymmetrySpec::MultiAxis { .. } => map_prime_two_axes(g, r),
        SymmetrySpec::Revolution { .. } | SymmetrySpec::None => Ok(map(g, r)),
        SymmetrySpec::Sphere => Err(Error::UnsupportedKind {
            kind: "sphere",
            reason: "every rotation is equivalent; there is nothing to partition".into(),
        }),
    }
}

/// Two rotations `h` apart that straddle the seam of [`map`] for a cyclic group.
///
/// Returns `(R^u_{π/M + h/2}·B, R^u_{π/M − h/2}·B)` with `B` a random tilt
/// about an axis perpendicular to `u` (so `B` carries no twist and the seam
/// stays at `π/M`). Their plain-Map canonicals are `2π/M − h` apart.
pub fn discontinuity_witness<R: Rng + ?Sized>(
    g: &SymmetryGroup,
    h: f64,
    rng: &mut R,
) -> Result<(Rotation, Rotation)> {
    let (axis, order) = match g.spec() {
        SymmetrySpec::Cyclic { axis, order } if *order >= 2 => (*axis, *order),
        other => {
            return Err(Error::UnsupportedKind {
                kind: other.kind_name(),
                reason: "witness needs a cyclic group of order >= 2".into(),
            })
        }
    };
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    let u = axis.as_vector();
    let tilt_axis = loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if let Ok(w) = UnitAxis::new(v - u * v.dot(u)) {
            break w;
        }
    };
    let tilt = Rotation::axis_angle_finite(&tilt_axis, rng.random_range(0.05..0.5));
    let seam = PI / order as f64;
    Ok((
        Rotation::axis_angle_finite(&axis, seam + h / 2.0) * tilt,
        Rotation::axis_angle_finite(&axis, seam - h / 2.0) * tilt,
    ))
}
