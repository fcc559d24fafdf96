//! Symmetry-aware pose errors.

use std::path::Path;

use nalgebra::Vector3;
use serde::Deserialize;

use crate::canonical::map_revolution_angle;
use crate::error::{Error, Result};
use crate::so3::{RigidMotion, Rotation};
use crate::symmetry::SymmetryGroup;

/// Model point cloud used for ADI. At least 4 finite points.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoints(Vec<Vector3<f64>>);

impl ModelPoints {
    pub fn new(pts: Vec<Vector3<f64>>) -> Result<Self> {
        if pts.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "model needs at least 4 points, got {}",
                pts.len()
            )));
        }
        if pts.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument("model points must be finite".into()));
        }
        Ok(ModelPoints(pts))
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.0
    }

    /// Parses a JSON array of `[x, y, z]` triples, or whitespace-separated
    /// XYZ text (three numbers per point; `#` starts a comment).
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('[') {
            let raw: Vec<[f64; 3]> =
                serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
            return Self::new(raw.into_iter().map(Vector3::from).collect());
        }
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                values.push(
                    tok.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad coordinate {tok:?}: {e}")))?,
                );
            }
        }
        if values.len() % 3 != 0 {
            return Err(Error::Parse(format!(
                "XYZ text has {} numbers, not a multiple of 3",
                values.len()
            )));
        }
        Self::new(
            values
                .chunks_exact(3)
                .map(|c| Vector3::new(c[0], c[1], c[2]))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl<'de> Deserialize<'de> for ModelPoints {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<[f64; 3]>::deserialize(d)?;
        ModelPoints::new(raw.into_iter().map(Vector3::from).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Average closest-point distance: for each ground-truth-placed model point,
/// the distance to the nearest estimate-placed model point, averaged.
pub fn adi(model: &ModelPoints, p_est: &RigidMotion, p_gt: &RigidMotion) -> f64 {
    let est: Vec<Vector3<f64>> = model.points().iter().map(|x| p_est.apply(x)).collect();
    let total: f64 = model
        .points()
        .iter()
        .map(|x| {
            let g = p_gt.apply(x);
            est.iter()
                .map(|e| (e - g).norm_squared())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / model.points().len() as f64
}

/// Smallest geodesic angle between `r_gt` and any rotation equivalent to `r_est`.
pub fn quotient_rotation_dist(g: &SymmetryGroup, r_est: &Rotation, r_gt: &Rotation) -> f64 {
    if g.is_sphere() {
        return 0.0;
    }
    if let Some(axis) = g.revolution_axis() {
        // max over α of tr((R_α r_est)ᵀ r_gt) is the twist of r_gt·r_estᵀ
        let rel = r_gt * &r_est.transpose();
        let a = map_revolution_angle(axis, &rel);
        let s = Rotation::axis_angle_finite(axis, a.angle);
        return (s * *r_est).geodesic_dist(r_gt);
    }
    g.elements()
        .expect("non-continuous groups are discrete")
        .iter()
        .map(|s| (s * r_est).geodesic_dist(r_gt))
        .fold(f64::INFINITY, f64::min)
}
