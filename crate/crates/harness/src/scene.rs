//! Synthetic observations of a symmetric object.
//!
//! The object is the union of the orbits of a few motif points under its
//! symmetry group (for a revolution group, the motif points are projected
//! onto the axis; a sphere is a single centre point). An observation is a
//! vector of polynomial invariants of the projected points: sums over group
//! elements of monomials in the centred image coordinates. Relabelling the
//! points by a group element permutes the summands, so equivalent poses give
//! the same features.
//!
//! Floating-point sums are order dependent, so for bit-exact equality the
//! points are rendered from `map(g, r).canonical` with its entries snapped to
//! a `2⁻²⁰` grid. The point set (and hence the exact feature values) is the
//! same one `r` itself would produce, up to that snapping.

use nalgebra::{Complex, Matrix3, Vector3};
use rand::Rng;
use symcanon::{map, pnp::MIN_DEPTH, random_rotation, Box3, Camera, RigidMotion, SymmetryGroup};

use crate::config::{HarnessConfig, TranslationSlab};
use crate::error::Result;

const QUANTUM: f64 = 1.0 / (1u64 << 20) as f64;
const MAX_DEGREE: usize = 6;

type C64 = Complex<f64>;

#[derive(Clone, Debug)]
pub struct Scene {
    pub group: SymmetryGroup,
    pub camera: Camera,
    pub bbox: Box3,
    pub slab: TranslationSlab,
    /// `orbits[k][s]` is element `s` applied to motif point `k`.
    orbits: Vec<Vec<Vector3<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub pose: RigidMotion,
}

impl Scene {
    pub fn new(cfg: &HarnessConfig) -> Result<Self> {
        cfg.validate()?;
        let group = SymmetryGroup::realize(&cfg.symmetry)?;
        let orbits = cfg
            .motif
            .iter()
            .map(|p| {
                let p = Vector3::from(*p);
                if let Some(e) = group.elements() {
                    e.iter().map(|s| s.apply(&p)).collect()
                } else if let Some(axis) = group.revolution_axis() {
                    let u = axis.as_vector();
                    vec![u * u.dot(&p)]
                } else {
                    vec![Vector3::zeros()]
                }
            })
            .collect();
        Ok(Scene {
            group,
            camera: cfg.camera,
            bbox: cfg.bbox,
            slab: cfg.translation,
            orbits,
        })
    }

    pub fn orbits(&self) -> &[Vec<Vector3<f64>>] {
        &self.orbits
    }

    fn orbit_size(&self) -> usize {
        self.orbits[0].len()
    }

    fn higher_degrees(&self) -> std::ops::RangeInclusive<usize> {
        3..=self.orbit_size().min(MAX_DEGREE)
    }

    pub fn feature_len(&self) -> usize {
        let k = self.orbits.len();
        let pairs = k * (k - 1) / 2;
        let higher = self.higher_degrees().count();
        // centroid, orbit means, products, hermitian products, higher powers
        2 + 2 * k + 2 * (k + pairs) + (k + 2 * pairs) + higher * 2 * (2 * k - 1)
    }

    /// Invariant features of the scene seen at `pose`.
    pub fn features(&self, pose: &RigidMotion) -> Result<Vec<f64>> {
        let canonical = map(&self.group, &pose.r).canonical;
        let q: Matrix3<f64> = canonical.matrix().map(|x| (x / QUANTUM).round() * QUANTUM);
        let qt = q.transpose();
        let mut image: Vec<Vec<C64>> = Vec::with_capacity(self.orbits.len());
        for orbit in &self.orbits {
            let mut pts = Vec::with_capacity(orbit.len());
            for x in orbit {
                let p = qt * x + pose.t;
                if p.z <= MIN_DEPTH {
                    return Err(symcanon::Error::BehindCamera { corner: 0, depth: p.z }.into());
                }
                pts.push(C64::new(p.x / p.z, p.y / p.z));
            }
            image.push(pts);
        }
        let total: usize = image.iter().map(Vec::len).sum();
        let centroid = image.iter().flatten().sum::<C64>() / total as f64;
        let w: Vec<Vec<C64>> = image
            .iter()
            .map(|o| o.iter().map(|z| z - centroid).collect())
            .collect();
        let n = self.orbit_size() as f64;
        let mean = |f: &dyn Fn(usize) -> C64| (0..self.orbit_size()).map(f).sum::<C64>() / n;

        let mut out = Vec::with_capacity(self.feature_len());
        let mut push = |z: C64| {
            out.push(z.re);
            out.push(z.im);
        };
        push(centroid);
        let k = w.len();
        for wa in &w {
            push(mean(&|s| wa[s]));
        }
        for a in 0..k {
            for b in a..k {
                push(mean(&|s| w[a][s] * w[b][s]));
            }
        }
        let mut herm = Vec::new();
        for a in 0..k {
            for b in a..k {
                let h = mean(&|s| w[a][s] * w[b][s].conj());
                herm.push(h.re);
                if a != b {
                    herm.push(h.im);
                }
            }
        }
        for j in self.higher_degrees() {
            for wa in &w {
                push(mean(&|s| wa[s].powu(j as u32)));
            }
            for a in 1..k {
                push(mean(&|s| w[0][s].powu(j as u32 - 1) * w[a][s]));
            }
        }
        out.extend(herm);
        debug_assert_eq!(out.len(), self.feature_len());
        Ok(out)
    }

    pub fn sample_pose<R: Rng + ?Sized>(&self, rng: &mut R) -> RigidMotion {
        let r = random_rotation(rng);
        let u = |rng: &mut R, range: [f64; 2]| {
            if range[0] == range[1] {
                range[0]
            } else {
                rng.random_range(range[0]..range[1])
            }
        };
        let t = Vector3::new(u(rng, self.slab.x), u(rng, self.slab.y), u(rng, self.slab.z));
        RigidMotion::new(r, t)
    }
}

/// `n` samples with Haar rotations and translations drawn from the slab.
pub fn make_dataset<R: Rng + ?Sized>(scene: &Scene, n: usize, rng: &mut R) -> Result<Vec<Sample>> {
    (0..n)
        .map(|_| {
            let pose = scene.sample_pose(rng);
            Ok(Sample {
                features: scene.features(&pose)?,
                pose,
            })
        })
        .collect()
}
