//! Versioned run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use symcanon::{Box3, Camera, SymmetrySpec};

use crate::error::{HarnessError, Result};

/// Config schema version understood by this build.
pub const CONFIG_VERSION: u32 = 1;

const DEFAULT_JSON: &str = include_str!("../configs/default.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Raw,
    MapOnly,
    MapPrime,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Raw, Mode::MapOnly, Mode::MapPrime];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Raw => "raw",
            Mode::MapOnly => "map_only",
            Mode::MapPrime => "map_prime",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationSlab {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub n_train: usize,
    pub n_val: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Learning rate at the last epoch as a fraction of the initial one
    /// (cosine decay in between).
    pub final_lr_fraction: f64,
    pub hidden: usize,
    pub loss: Loss,
    /// Rotation error (which needs PnP per sample) is measured every this many
    /// epochs and at the last epoch.
    pub eval_every: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Width (radians of twist) of the band around the plain-Map seam.
    pub seam_band: f64,
    /// Width (radians of twist) of the band around a region boundary.
    pub region_band: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub version: u32,
    pub symmetry: SymmetrySpec,
    pub camera: Camera,
    #[serde(rename = "box")]
    pub bbox: Box3,
    /// Object points whose orbits under the symmetry group form the scene.
    pub motif: Vec<[f64; 3]>,
    pub translation: TranslationSlab,
    pub data: DataConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub seed: u64,
    pub modes: Vec<Mode>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT_JSON).expect("bundled default config is valid")
    }
}

impl HarnessConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: HarnessConfig = serde_json::from_str(text).map_err(|e| {
            HarnessError::Config(format!(
                "line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.version != CONFIG_VERSION {
            return bad(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        self.symmetry.validate()?;
        self.camera.validate()?;
        self.bbox.validate()?;
        if self.motif.is_empty() || self.motif.iter().flatten().any(|x| !x.is_finite()) {
            return bad("motif needs at least one finite point".into());
        }
        for (name, r) in [
            ("x", self.translation.x),
            ("y", self.translation.y),
            ("z", self.translation.z),
        ] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                return bad(format!("translation.{name} must be an ordered finite range"));
            }
        }
        let t = &self.train;
        if t.epochs < 1 {
            return bad("train.epochs must be at least 1".into());
        }
        if !(t.learning_rate > 0.0 && t.learning_rate.is_finite()) {
            return bad("train.learning_rate must be positive".into());
        }
        if !(t.final_lr_fraction > 0.0 && t.final_lr_fraction <= 1.0) {
            return bad("train.final_lr_fraction must be in (0, 1]".into());
        }
        if t.batch_size < 1 || t.hidden < 1 || t.hidden > 128 || t.eval_every < 1 {
            return bad("batch_size, eval_every must be >= 1 and hidden in 1..=128".into());
        }
        if self.data.n_train < 1 || self.data.n_val < 1 {
            return bad("data.n_train and data.n_val must be >= 1".into());
        }
        if !(self.eval.seam_band > 0.0 && self.eval.region_band > 0.0) {
            return bad("eval bands must be positive".into());
        }
        if self.modes.is_empty() {
            return bad("modes must not be empty".into());
        }
        Ok(())
    }

    /// Smallest camera-frame depth any scene point or box corner can reach.
    pub fn min_depth(&self) -> f64 {
        let reach = self
            .motif
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
            .chain(std::iter::once(
                self.bbox.half_extents.iter().map(|h| h * h).sum::<f64>().sqrt(),
            ))
            .fold(0.0, f64::max);
        self.translation.z[0] - reach
    }
}
