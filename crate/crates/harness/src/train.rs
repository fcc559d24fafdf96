//! Training and evaluation of the three target conventions.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use symcanon::{
    map, map_prime, map_revolution_angle, map_to_region, pnp_solve, project_corners,
    quotient_rotation_dist, Corners2D, RigidMotion, Rotation, SymmetrySpec,
};

use crate::config::{HarnessConfig, Loss, Mode};
use crate::error::{HarnessError, Result};
use crate::net::{Adam, Mlp, MlpRecord, Objective};
use crate::report::{EpochRecord, HarnessReport, Summary};
use crate::scene::{make_dataset, Sample, Scene};

/// Format version of serialized models.
pub const MODEL_VERSION: u32 = 1;

// RNG streams derived from the run seed.
const STREAM_TRAIN: u64 = 1;
const STREAM_VAL: u64 = 2;
const STREAM_INIT: u64 = 3;
const STREAM_SHUFFLE: u64 = 4;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-column affine normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone) -> Self {
        let n = rows.clone().count().max(1) as f64;
        let dim = rows.clone().next().map_or(0, <[f64]>::len);
        let mut mean = vec![0.0; dim];
        for r in rows.clone() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let std = var.into_iter().map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 }).collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn invert(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| x * s + m)
            .collect()
    }
}

/// Number of regressors `mode` uses for this group.
pub fn regressor_count(scene: &Scene, mode: Mode) -> usize {
    match mode {
        Mode::MapPrime => scene
            .group
            .sqrt_group()
            .map_or(1, |sq| sq.representatives.len()),
        _ => 1,
    }
}

/// The rotation a regressor is trained to output, and which regressor.
pub fn target_rotation(scene: &Scene, mode: Mode, r: &Rotation) -> Result<(Rotation, usize)> {
    let g = &scene.group;
    Ok(match mode {
        Mode::Raw => (*r, 0),
        Mode::MapOnly => (map(g, r).canonical, 0),
        Mode::MapPrime if g.sqrt_group().is_ok() => {
            let c = map_prime(g, r)?;
            (c.canonical, c.delta.expect("partitioned").class_index())
        }
        Mode::MapPrime => (map(g, r).canonical, 0),
    })
}

/// `r` in the chart of regressor `index` (only differs from
/// [`target_rotation`] when a sample is routed to another region).
fn chart_rotation(scene: &Scene, mode: Mode, r: &Rotation, index: usize) -> Result<Rotation> {
    if mode == Mode::MapPrime {
        if let Ok(sq) = scene.group.sqrt_group() {
            let delta = sq.representatives[index].1;
            return Ok(map_to_region(&scene.group, r, delta)?.canonical);
        }
    }
    Ok(target_rotation(scene, mode, r)?.0)
}

fn corners_of(scene: &Scene, r: &Rotation, t: &nalgebra::Vector3<f64>) -> Result<[f64; 16]> {
    Ok(project_corners(&scene.camera, &scene.bbox, &RigidMotion::new(*r, *t))?.to_flat())
}

/// Trained networks for one mode.
#[derive(Clone, Debug)]
pub struct Trained {
    pub mode: Mode,
    pub input_norm: Standardizer,
    pub target_norm: Standardizer,
    pub regressors: Vec<Mlp>,
    pub classifier: Option<Mlp>,
}

impl Trained {
    /// Regressor index chosen for standardized features `x` (one row).
    fn route_rows(&self, x: &DMatrix<f64>) -> Vec<usize> {
        match &self.classifier {
            Some(c) => c
                .forward(x)
                .row_iter()
                .map(|row| row.transpose().argmax().0)
                .collect(),
            None => vec![0; x.nrows()],
        }
    }

    pub fn standardize(&self, samples: &[&[f64]]) -> DMatrix<f64> {
        let cols = self.input_norm.mean.len();
        let mut x = DMatrix::zeros(samples.len(), cols);
        for (i, f) in samples.iter().enumerate() {
            for (j, v) in self.input_norm.apply(f).into_iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        x
    }

    fn predict_with(&self, x: &DMatrix<f64>, routes: &[usize]) -> Vec<[f64; 16]> {
        let mut out = vec![[0.0; 16]; x.nrows()];
        for (k, reg) in self.regressors.iter().enumerate() {
            let idx: Vec<usize> = (0..x.nrows()).filter(|&i| routes[i] == k).collect();
            if idx.is_empty() {
                continue;
            }
            let xs = x.select_rows(idx.iter());
            let y = reg.forward(&xs);
            for (row, &i) in idx.iter().enumerate() {
                let z: Vec<f64> = y.row(row).iter().copied().collect();
                let px = self.target_norm.invert(&z);
                out[i].copy_from_slice(&px);
            }
        }
        out
    }

    /// Regressor index and predicted corners for each feature vector.
    pub fn predict(&self, features: &[&[f64]]) -> (Vec<usize>, Vec<Corners2D>) {
        let x = self.standardize(features);
        let routes = self.route_rows(&x);
        let flat = self.predict_with(&x, &routes);
        let corners = flat
            .iter()
            .map(|f| Corners2D(std::array::from_fn(|i| [f[2 * i], f[2 * i + 1]])))
            .collect();
        (routes, corners)
    }

    /// Corners from a specific regressor, bypassing the classifier.
    pub fn predict_forced(&self, features: &[f64], index: usize) -> Corners2D {
        let x = self.standardize(&[features]);
        let f = self.predict_with(&x, &[index])[0];
        Corners2D(std::array::from_fn(|i| [f[2 * i], f[2 * i + 1]]))
    }

    pub fn to_file(&self, cfg: &HarnessConfig) -> ModelFile {
        ModelFile {
            format_version: MODEL_VERSION,
            mode: self.mode,
            symmetry: cfg.symmetry.clone(),
            camera: cfg.camera,
            bbox: cfg.bbox,
            motif: cfg.motif.clone(),
            input_norm: self.input_norm.clone(),
            target_norm: self.target_norm.clone(),
            regressors: self.regressors.iter().map(Mlp::to_record).collect(),
            classifier: self.classifier.as_ref().map(Mlp::to_record),
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        if file.format_version != MODEL_VERSION {
            return Err(HarnessError::Model(format!(
                "model format {} is not supported (expected {MODEL_VERSION})",
                file.format_version
            )));
        }
        Ok(Trained {
            mode: file.mode,
            input_norm: file.input_norm.clone(),
            target_norm: file.target_norm.clone(),
            regressors: file
                .regressors
                .iter()
                .map(Mlp::from_record)
                .collect::<Result<_>>()?,
            classifier: file.classifier.as_ref().map(Mlp::from_record).transpose()?,
        })
    }
}

/// Versioned on-disk form of [`Trained`], with the scene it was trained on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub mode: Mode,
    pub symmetry: SymmetrySpec,
    pub camera: symcanon::Camera,
    #[serde(rename = "box")]
    pub bbox: symcanon::Box3,
    pub motif: Vec<[f64; 3]>,
    pub input_norm: Standardizer,
    pub target_norm: Standardizer,
    pub regressors: Vec<MlpRecord>,
    pub classifier: Option<MlpRecord>,
}

/// Pose recovered from predicted corners.
pub fn infer(scene: &Scene, trained: &Trained, features: &[f64]) -> Result<(Corners2D, RigidMotion)> {
    let (_, corners) = trained.predict(&[features]);
    let pose = pnp_solve(&scene.camera, &scene.bbox, &corners[0])?;
    Ok((corners[0], pose))
}

/// Rotation error after PnP; a failed solve counts as `π`.
pub fn rotation_error(scene: &Scene, corners: &Corners2D, truth: &Rotation) -> f64 {
    match pnp_solve(&scene.camera, &scene.bbox, corners) {
        Ok(p) => quotient_rotation_dist(&scene.group, &p.r, truth),
        Err(_) => PI,
    }
}

/// Twist of `map(g, r).canonical` about the group's first axis, for cyclic groups.
pub fn canonical_twist(scene: &Scene, r: &Rotation) -> Option<(f64, u32)> {
    match scene.group.spec() {
        SymmetrySpec::Cyclic { axis, order } => {
            let c = map(&scene.group, r).canonical;
            Some((map_revolution_angle(axis, &c).angle, *order))
        }
        _ => None,
    }
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// Standardized inputs, standardized corner targets and regressor labels.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub labels: Vec<usize>,
}

pub fn prepare(scene: &Scene, mode: Mode, data: &[Sample], trained: &Trained) -> Result<Prepared> {
    let feats: Vec<&[f64]> = data.iter().map(|s| s.features.as_slice()).collect();
    let x = trained.standardize(&feats);
    let mut y = DMatrix::zeros(data.len(), 16);
    let mut labels = Vec::with_capacity(data.len());
    for (i, s) in data.iter().enumerate() {
        let (r, k) = target_rotation(scene, mode, &s.pose.r)?;
        let z = trained.target_norm.apply(&corners_of(scene, &r, &s.pose.t)?);
        for (j, v) in z.into_iter().enumerate() {
            y[(i, j)] = v;
        }
        labels.push(k);
    }
    Ok(Prepared { x, y, labels })
}

fn one_hot(labels: &[usize], classes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(labels.len(), classes);
    for (i, &l) in labels.iter().enumerate() {
        m[(i, l)] = 1.0;
    }
    m
}

fn learning_rate(cfg: &HarnessConfig, epoch: usize) -> f64 {
    let t = &cfg.train;
    if t.epochs <= 1 {
        return t.learning_rate;
    }
    let phase = epoch as f64 / (t.epochs - 1) as f64;
    let f = t.final_lr_fraction;
    t.learning_rate * (f + (1.0 - f) * 0.5 * (1.0 + (PI * phase).cos()))
}

/// One pass of mini-batch Adam over `rows` of (`x`, `y`). Returns summed
/// (loss × batch size).
#[allow(clippy::too_many_arguments)]
fn epoch_pass(
    net: &mut Mlp,
    opt: &mut Adam,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    rows: &mut [usize],
    batch: usize,
    lr: f64,
    obj: Objective,
    rng: &mut ChaCha8Rng,
) -> f64 {
    rows.shuffle(rng);
    let mut total = 0.0;
    for chunk in rows.chunks(batch) {
        let xb = x.select_rows(chunk.iter());
        let yb = y.select_rows(chunk.iter());
        let (loss, g) = net.loss_and_grad(&xb, &yb, obj);
        opt.update(net, &g, lr);
        total += loss * chunk.len() as f64;
    }
    total
}

/// Datasets for a run, identical across modes for the same seed.
pub fn datasets(scene: &Scene, cfg: &HarnessConfig) -> Result<(Vec<Sample>, Vec<Sample>)> {
    let train = make_dataset(scene, cfg.data.n_train, &mut stream_rng(cfg.seed, STREAM_TRAIN))?;
    let val = make_dataset(scene, cfg.data.n_val, &mut stream_rng(cfg.seed, STREAM_VAL))?;
    Ok((train, val))
}

/// Trains `mode` on `train_set` and reports per-epoch metrics on `val_set`.
pub fn train(
    scene: &Scene,
    cfg: &HarnessConfig,
    mode: Mode,
    train_set: &[Sample],
    val_set: &[Sample],
) -> Result<(Trained, HarnessReport)> {
    if train_set.is_empty() || val_set.is_empty() {
        return Err(HarnessError::Config("training and validation sets must be non-empty".into()));
    }
    let n_reg = regressor_count(scene, mode);
    let regression = Objective::Regression(cfg.train.loss);

    let input_norm = Standardizer::fit(train_set.iter().map(|s| s.features.as_slice()));
    let mut raw_targets = Vec::with_capacity(train_set.len());
    for s in train_set {
        let (r, _) = target_rotation(scene, mode, &s.pose.r)?;
        raw_targets.push(corners_of(scene, &r, &s.pose.t)?);
    }
    let target_norm = Standardizer::fit(raw_targets.iter().map(|t| t.as_slice()));

    let n_in = scene.feature_len();
    let mut init_rng = stream_rng(cfg.seed, STREAM_INIT);
    let regressors = (0..n_reg)
        .map(|_| Mlp::new(n_in, cfg.train.hidden, 16, &mut init_rng))
        .collect();
    let classifier = (n_reg > 1).then(|| Mlp::new(n_in, cfg.train.hidden, n_reg, &mut init_rng));
    let mut trained = Trained {
        mode,
        input_norm,
        target_norm,
        regressors,
        classifier,
    };

    let tr = prepare(scene, mode, train_set, &trained)?;
    let mut rows: Vec<Vec<usize>> = (0..n_reg)
        .map(|k| (0..train_set.len()).filter(|&i| tr.labels[i] == k).collect())
        .collect();
    let mut all_rows: Vec<usize> = (0..train_set.len()).collect();
    let labels_1h = one_hot(&tr.labels, n_reg);
    let mut opts: Vec<Adam> = trained.regressors.iter().map(Adam::new).collect();
    let mut clf_opt = trained.classifier.as_ref().map(Adam::new);
    let mut shuffle_rng = stream_rng(cfg.seed, STREAM_SHUFFLE);

    let val = Validation::new(scene, mode, val_set, &trained)?;
    let mut epochs = Vec::with_capacity(cfg.train.epochs);
    for epoch in 0..cfg.train.epochs {
        let lr = learning_rate(cfg, epoch);
        let mut total = 0.0;
        for k in 0..n_reg {
            if rows[k].is_empty() {
                continue;
            }
            total += epoch_pass(
                &mut trained.regressors[k],
                &mut opts[k],
                &tr.x,
                &tr.y,
                &mut rows[k],
                cfg.train.batch_size,
                lr,
                regression,
                &mut shuffle_rng,
            );
        }
        let loss = total / train_set.len() as f64;
        if let (Some(c), Some(o)) = (trained.classifier.as_mut(), clf_opt.as_mut()) {
            epoch_pass(
                c,
                o,
                &tr.x,
                &labels_1h,
                &mut all_rows,
                cfg.train.batch_size,
                lr,
                Objective::Classification,
                &mut shuffle_rng,
            );
        }
        if !loss.is_finite() {
            return Err(HarnessError::Diverged {
                mode: mode.name(),
                epoch,
                loss,
            });
        }
        let last = epoch + 1 == cfg.train.epochs;
        let with_rotation = last || (epoch + 1) % cfg.train.eval_every == 0;
        let m = val.measure(scene, &trained, with_rotation)?;
        epochs.push(EpochRecord {
            epoch,
            loss,
            val_rms_px: m.rms_px,
            val_rot_err_rad: m.rot_err_mean,
            clf_acc: m.clf_acc,
        });
    }
    let summary = val.summarize(scene, cfg, &trained)?;
    Ok((
        trained,
        HarnessReport {
            mode,
            seed: cfg.seed,
            loss: cfg.train.loss,
            epochs,
            summary,
        },
    ))
}

/// Runs one mode end to end from a config.
pub fn run(cfg: &HarnessConfig, mode: Mode) -> Result<(Trained, HarnessReport)> {
    let scene = Scene::new(cfg)?;
    let (tr, val) = datasets(&scene, cfg)?;
    train(&scene, cfg, mode, &tr, &val)
}

struct Validation<'a> {
    data: &'a [Sample],
    mode: Mode,
    x: DMatrix<f64>,
    labels: Vec<usize>,
    raw_corners: Vec<[f64; 16]>,
}

struct Measured {
    rms_px: f64,
    rot_err_mean: Option<f64>,
    clf_acc: Option<f64>,
}

fn rms(a: &[f64; 16], b: &[f64; 16]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

fn to_corners(f: &[f64; 16]) -> Corners2D {
    Corners2D(std::array::from_fn(|i| [f[2 * i], f[2 * i + 1]]))
}

impl<'a> Validation<'a> {
    fn new(scene: &Scene, mode: Mode, data: &'a [Sample], trained: &Trained) -> Result<Self> {
        let p = prepare(scene, mode, data, trained)?;
        let raw_corners = data
            .iter()
            .map(|s| corners_of(scene, &s.pose.r, &s.pose.t))
            .collect::<Result<_>>()?;
        Ok(Validation {
            data,
            mode,
            x: p.x,
            labels: p.labels,
            raw_corners,
        })
    }

    fn routes(&self, trained: &Trained) -> Vec<usize> {
        trained.route_rows(&self.x)
    }

    fn measure(&self, scene: &Scene, trained: &Trained, with_rotation: bool) -> Result<Measured> {
        let routes = self.routes(trained);
        let preds = trained.predict_with(&self.x, &routes);
        let mut sq = 0.0;
        for (i, s) in self.data.iter().enumerate() {
            let r = chart_rotation(scene, self.mode, &s.pose.r, routes[i])?;
            sq += rms(&preds[i], &corners_of(scene, &r, &s.pose.t)?);
        }
        let rms_px = (sq / (16 * self.data.len()) as f64).sqrt();
        let rot_err_mean = with_rotation.then(|| {
            let errs: Vec<f64> = self
                .data
                .iter()
                .zip(&preds)
                .map(|(s, p)| rotation_error(scene, &to_corners(p), &s.pose.r))
                .collect();
            mean(&errs)
        });
        let clf_acc = trained.classifier.as_ref().map(|_| {
            let hits = routes.iter().zip(&self.labels).filter(|(a, b)| a == b).count();
            hits as f64 / self.labels.len() as f64
        });
        Ok(Measured {
            rms_px,
            rot_err_mean,
            clf_acc,
        })
    }

    fn summarize(&self, scene: &Scene, cfg: &HarnessConfig, trained: &Trained) -> Result<Summary> {
        let routes = self.routes(trained);
        let preds = trained.predict_with(&self.x, &routes);
        let n = self.data.len();
        let errs: Vec<f64> = self
            .data
            .iter()
            .zip(&preds)
            .map(|(s, p)| rotation_error(scene, &to_corners(p), &s.pose.r))
            .collect();
        let pnp_failures = errs.iter().filter(|e| **e == PI).count();

        let mut sq = 0.0;
        let mut sq_centroid = 0.0;
        for (i, s) in self.data.iter().enumerate() {
            let r = chart_rotation(scene, self.mode, &s.pose.r, routes[i])?;
            sq += rms(&preds[i], &corners_of(scene, &r, &s.pose.t)?);
            let raw = &self.raw_corners[i];
            let c = to_corners(raw).centroid();
            let flat_c: [f64; 16] = std::array::from_fn(|k| c[k % 2]);
            sq_centroid += rms(raw, &flat_c);
        }
        let denom = (16 * n) as f64;

        // raw predictions against the average over each sample's orbit
        let orbit_mean_rms_px = match (self.mode, scene.group.elements()) {
            (Mode::Raw, Some(elements)) => {
                let mut acc = 0.0;
                for (i, s) in self.data.iter().enumerate() {
                    let mut avg = [0.0; 16];
                    for e in elements {
                        let c = corners_of(scene, &(e * &s.pose.r), &s.pose.t)?;
                        for k in 0..16 {
                            avg[k] += c[k] / elements.len() as f64;
                        }
                    }
                    acc += rms(&preds[i], &avg);
                }
                Some((acc / denom).sqrt())
            }
            _ => None,
        };

        let mut s = Summary {
            val_rot_err_mean: mean(&errs),
            val_rot_err_median: median(&errs).unwrap_or(0.0),
            val_rms_px: (sq / denom).sqrt(),
            centroid_rms_px: (sq_centroid / denom).sqrt(),
            orbit_mean_rms_px,
            pnp_failures,
            clf_acc: None,
            clf_acc_interior: None,
            seam_band_err_mean: None,
            seam_band_err_median: None,
            seam_interior_err_mean: None,
            seam_interior_err_median: None,
            misrouted_forced_err_median: None,
            misrouted_forced_count: 0,
            misrouted_actual_err_median: None,
            misrouted_actual_count: 0,
        };

        let twists: Vec<Option<(f64, u32)>> =
            self.data.iter().map(|d| canonical_twist(scene, &d.pose.r)).collect();
        if twists.iter().all(Option::is_some) {
            let (band, inner): (Vec<_>, Vec<_>) = errs
                .iter()
                .zip(&twists)
                .partition(|(_, t)| {
                    let (a, m) = t.expect("checked");
                    PI / m as f64 - a.abs() < cfg.eval.seam_band
                });
            let v = |p: Vec<(&f64, &Option<(f64, u32)>)>| p.into_iter().map(|(e, _)| *e).collect::<Vec<_>>();
            let (band, inner) = (v(band), v(inner));
            s.seam_band_err_mean = (!band.is_empty()).then(|| mean(&band));
            s.seam_band_err_median = median(&band);
            s.seam_interior_err_mean = (!inner.is_empty()).then(|| mean(&inner));
            s.seam_interior_err_median = median(&inner);
        }

        if trained.classifier.is_some() {
            let hits = routes.iter().zip(&self.labels).filter(|(a, b)| a == b).count();
            s.clf_acc = Some(hits as f64 / n as f64);
            if twists.iter().all(Option::is_some) {
                let region_dist = |t: &Option<(f64, u32)>| {
                    let (a, m) = t.expect("checked");
                    (a.abs() - PI / (2.0 * m as f64)).abs()
                };
                let interior: Vec<usize> = (0..n)
                    .filter(|&i| region_dist(&twists[i]) > cfg.eval.region_band)
                    .collect();
                if !interior.is_empty() {
                    let h = interior.iter().filter(|&&i| routes[i] == self.labels[i]).count();
                    s.clf_acc_interior = Some(h as f64 / interior.len() as f64);
                }
                let n_reg = trained.regressors.len();
                let mut forced = Vec::new();
                for i in (0..n).filter(|&i| region_dist(&twists[i]) <= cfg.eval.region_band) {
                    for k in (0..n_reg).filter(|&k| k != self.labels[i]) {
                        let c = trained.predict_forced(&self.data[i].features, k);
                        forced.push(rotation_error(scene, &c, &self.data[i].pose.r));
                    }
                }
                s.misrouted_forced_count = forced.len();
                s.misrouted_forced_err_median = median(&forced);
            }
            let actual: Vec<f64> = (0..n)
                .filter(|&i| routes[i] != self.labels[i])
                .map(|i| errs[i])
                .collect();
            s.misrouted_actual_count = actual.len();
            s.misrouted_actual_err_median = median(&actual);
        }
        Ok(s)
    }
}

/// Loss switch used by the mode-ordering robustness check.
pub fn with_loss(cfg: &HarnessConfig, loss: Loss) -> HarnessConfig {
    let mut c = cfg.clone();
    c.train.loss = loss;
    c
}
