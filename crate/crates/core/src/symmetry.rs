//! Proper symmetry groups of rigid objects.
//!
//! A [`SymmetrySpec`] is the declarative description (what the JSON config
//! holds); [`SymmetryGroup::realize`] turns it into an explicit element list
//! for discrete groups, or a symbolic tag for revolution and sphere symmetry.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::canonical::{map_revolution_angle, RegionIndex};
use crate::error::{Error, Result};
use crate::so3::{wrap_angle, Rotation, UnitAxis};

/// Frobenius distance under which two group elements are the same element.
pub const DEDUP_TOL: f64 = 1e-7;

/// Upper bound on the size of a closure before it is declared infinite.
pub const CLOSURE_CAP: usize = 10_000;

/// A generator: rotation about `axis` by `2π/order`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisOrder {
    pub axis: UnitAxis,
    pub order: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetrySpec {
    None,
    Cyclic { axis: UnitAxis, order: u32 },
    MultiAxis { factors: Vec<AxisOrder> },
    Revolution { axis: UnitAxis },
    Sphere,
}

impl SymmetrySpec {
    pub fn cyclic(axis: UnitAxis, order: u32) -> Self {
        SymmetrySpec::Cyclic { axis, order }
    }

    pub fn multi_axis(factors: &[(UnitAxis, u32)]) -> Self {
        SymmetrySpec::MultiAxis {
            factors: factors
                .iter()
                .map(|&(axis, order)| AxisOrder { axis, order })
                .collect(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SymmetrySpec::None => "none",
            SymmetrySpec::Cyclic { .. } => "cyclic",
            SymmetrySpec::MultiAxis { .. } => "multi_axis",
            SymmetrySpec::Revolution { .. } => "revolution",
            SymmetrySpec::Sphere => "sphere",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SymmetrySpec::Cyclic { order, .. } if *order == 0 => {
                Err(Error::InvalidSpec("cyclic order must be >= 1".into()))
            }
            SymmetrySpec::MultiAxis { factors } => {
                if !(2..=3).contains(&factors.len()) {
                    return Err(Error::InvalidSpec(format!(
                        "multi_axis needs 2 or 3 factors, got {}",
                        factors.len()
                    )));
                }
                if factors.iter().any(|f| f.order == 0) {
                    return Err(Error::InvalidSpec("multi_axis orders must be >= 1".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Axis used to order group elements; `None` for groups without one.
    pub fn primary_axis(&self) -> Option<UnitAxis> {
        match self {
            SymmetrySpec::Cyclic { axis, .. } | SymmetrySpec::Revolution { axis } => Some(*axis),
            SymmetrySpec::MultiAxis { factors } => factors.first().map(|f| f.axis),
            SymmetrySpec::None | SymmetrySpec::Sphere => None,
        }
    }
}

#[derive(Clone, Debug)]
enum Body {
    Discrete(Vec<Rotation>),
    Revolution(UnitAxis),
    Sphere,
}

/// The realized group `M(O)`.
///
/// Discrete elements are kept in a fixed order: by rotation angle about the
/// first axis (wrapped to `(-π, π]`), then lexicographically by matrix entry.
/// Argmin ties are broken toward the earliest element in that order.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    spec: SymmetrySpec,
    body: Body,
    sqrt: Option<SqrtGroup>,
}

/// The half-step anchor set `√M(O)` with the region label of every anchor.
#[derive(Clone, Debug)]
pub struct SqrtGroup {
    /// Anchors in canonical order.
    pub anchors: Vec<Rotation>,
    /// Region label of each anchor (parallel to `anchors`).
    pub labels: Vec<RegionIndex>,
    /// Region representatives: `I`, `R^u_{π/M}` (and `R^v_{π/N}`,
    /// `R^u_{π/M}·R^v_{π/N}` for two axes), each paired with its label.
    pub representatives: Vec<(Rotation, RegionIndex)>,
}

impl SymmetryGroup {
    pub fn realize(spec: &SymmetrySpec) -> Result<Self> {
        spec.validate()?;
        let body = match spec {
            SymmetrySpec::None => Body::Discrete(vec![Rotation::identity()]),
            SymmetrySpec::Cyclic { axis, order } => {
                let m = *order as usize;
                let elements = (0..m)
                    .map(|k| Rotation::axis_angle_finite(axis, 2.0 * PI * k as f64 / m as f64))
                    .collect();
                Body::Discrete(sorted(elements, axis))
            }
            SymmetrySpec::MultiAxis { factors } => {
                let gens: Vec<Rotation> = factors
                    .iter()
                    .map(|f| Rotation::axis_angle_finite(&f.axis, 2.0 * PI / f.order as f64))
                    .collect();
                Body::Discrete(sorted(closure(&gens)?, &factors[0].axis))
            }
            SymmetrySpec::Revolution { axis } => Body::Revolution(*axis),
            SymmetrySpec::Sphere => Body::Sphere,
        };
        let mut group = SymmetryGroup {
            spec: spec.clone(),
            body,
            sqrt: None,
        };
        group.sqrt = build_sqrt_group(&group);
        Ok(group)
    }

    pub fn spec(&self) -> &SymmetrySpec {
        &self.spec
    }

    pub fn kind_name(&self) -> &'static str {
        self.spec.kind_name()
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.body, Body::Discrete(_))
    }

    /// Element list of a discrete group.
    pub fn elements(&self) -> Option<&[Rotation]> {
        match &self.body {
            Body::Discrete(e) => Some(e),
            _ => None,
        }
    }

    /// Axis of a revolution group.
    pub fn revolution_axis(&self) -> Option<&UnitAxis> {
        match &self.body {
            Body::Revolution(axis) => Some(axis),
            _ => None,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.body, Body::Sphere)
    }

    /// Number of elements, `None` for continuous groups.
    pub fn order(&self) -> Option<usize> {
        self.elements().map(<[Rotation]>::len)
    }

    pub fn contains(&self, r: &Rotation, tol: f64) -> bool {
        match &self.body {
            Body::Discrete(e) => e.iter().any(|s| s.frobenius_dist_to(r) <= tol),
            Body::Revolution(axis) => {
                let a = map_revolution_angle(axis, r);
                Rotation::axis_angle_finite(axis, a.angle).frobenius_dist_to(r) <= tol
            }
            Body::Sphere => true,
        }
    }

    /// `r1 ∼ r2`: some `S ∈ M(O)` has `‖S·r2 − r1‖_F ≤ tol`.
    pub fn equivalent(&self, r1: &Rotation, r2: &Rotation, tol: f64) -> bool {
        match &self.body {
            Body::Discrete(e) => e.iter().any(|s| (s * r2).frobenius_dist_to(r1) <= tol),
            Body::Revolution(axis) => {
                // min over α of ‖R_α·r2 − r1‖ is attained by the twist of r1·r2ᵀ
                let rel = r1 * &r2.transpose();
                let a = map_revolution_angle(axis, &rel);
                let s = Rotation::axis_angle_finite(axis, a.angle);
                (s * *r2).frobenius_dist_to(r1) <= tol
            }
            Body::Sphere => true,
        }
    }

    /// The anchor set `√M(O)` used by the region partition.
    pub fn sqrt_group(&self) -> Result<&SqrtGroup> {
        match (&self.sqrt, &self.spec) {
            (Some(s), _) => Ok(s),
            (None, SymmetrySpec::MultiAxis { factors }) => Err(Error::UnsupportedKind {
                kind: "multi_axis",
                reason: format!(
                    "region partition is implemented for two axes, got {}",
                    factors.len()
                ),
            }),
            (None, spec) => Err(Error::UnsupportedKind {
                kind: spec.kind_name(),
                reason: "Map is continuous or trivial here; no partition is needed".into(),
            }),
        }
    }
}

fn build_sqrt_group(group: &SymmetryGroup) -> Option<SqrtGroup> {
    let elements = group.elements()?;
    let (first_axis, anchors, representatives) = match &group.spec {
        SymmetrySpec::Cyclic { axis, order } => {
            let m = *order as usize;
            let anchors = (0..2 * m)
                .map(|k| Rotation::axis_angle_finite(axis, PI * k as f64 / m as f64))
                .collect::<Vec<_>>();
            let reps = vec![
                (Rotation::identity(), RegionIndex::Single(1)),
                (
                    Rotation::axis_angle_finite(axis, PI / m as f64),
                    RegionIndex::Single(2),
                ),
            ];
            (*axis, anchors, reps)
        }
        SymmetrySpec::MultiAxis { factors } if factors.len() == 2 => {
            let (u, m) = (factors[0].axis, factors[0].order as usize);
            let (v, n) = (factors[1].axis, factors[1].order as usize);
            let mut anchors: Vec<Rotation> = Vec::with_capacity(4 * m * n);
            for i in 0..2 * m {
                let ru = Rotation::axis_angle_finite(&u, PI * i as f64 / m as f64);
                for j in 0..2 * n {
                    let rv = Rotation::axis_angle_finite(&v, PI * j as f64 / n as f64);
                    let a = ru * rv;
                    if !anchors.iter().any(|b| b.frobenius_dist_to(&a) <= DEDUP_TOL) {
                        anchors.push(a);
                    }
                }
            }
            let half_u = Rotation::axis_angle_finite(&u, PI / m as f64);
            let half_v = Rotation::axis_angle_finite(&v, PI / n as f64);
            let reps = vec![
                (Rotation::identity(), RegionIndex::Pair(1, 1)),
                (half_u, RegionIndex::Pair(2, 1)),
                (half_v, RegionIndex::Pair(1, 2)),
                (half_u * half_v, RegionIndex::Pair(2, 2)),
            ];
            (u, anchors, reps)
        }
        _ => return None,
    };
    let anchors = sorted(anchors, &first_axis);
    // An anchor belongs to the first region whose representative's orbit
    // M(O)·rep contains it; anything else falls through to the last region.
    let (last, tested) = representatives.split_last()?;
    let labels = anchors
        .iter()
        .map(|a| {
            tested
                .iter()
                .find(|(rep, _)| {
                    elements
                        .iter()
                        .any(|s| (s * rep).frobenius_dist_to(a) <= DEDUP_TOL)
                })
                .map_or(last.1, |(_, label)| *label)
        })
        .collect();
    Some(SqrtGroup {
        anchors,
        labels,
        representatives,
    })
}

fn closure(generators: &[Rotation]) -> Result<Vec<Rotation>> {
    let mut elements = vec![Rotation::identity()];
    let mut frontier = 0;
    while frontier < elements.len() {
        let current = elements[frontier];
        frontier += 1;
        for g in generators {
            let candidate = current * *g;
            if !elements
                .iter()
                .any(|e| e.frobenius_dist_to(&candidate) <= DEDUP_TOL)
            {
                if elements.len() >= CLOSURE_CAP {
                    return Err(Error::GroupNotFinite { cap: CLOSURE_CAP });
                }
                elements.push(candidate);
            }
        }
    }
    Ok(elements)
}

/// Twist angle about `axis`, wrapped with -π snapped onto π.
pub(crate) fn order_angle(axis: &UnitAxis, r: &Rotation) -> f64 {
    let a = wrap_angle(map_revolution_angle(axis, r).angle);
    if a < -PI + 1e-9 {
        PI
    } else {
        a
    }
}

fn canonical_cmp(axis: &UnitAxis, a: &Rotation, b: &Rotation) -> Ordering {
    const EPS: f64 = 1e-9;
    let (ta, tb) = (order_angle(axis, a), order_angle(axis, b));
    if (ta - tb).abs() > EPS {
        return ta.total_cmp(&tb);
    }
    for (x, y) in a.to_row_major().iter().zip(b.to_row_major().iter()) {
        if (x - y).abs() > EPS {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

fn sorted(mut elements: Vec<Rotation>, axis: &UnitAxis) -> Vec<Rotation> {
    elements.sort_by(|a, b| canonical_cmp(axis, a, b));
    elements
}
