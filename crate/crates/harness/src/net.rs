//! One-hidden-layer tanh network with a linear head, plus Adam.
//!
//! Batches are row-major: one sample per row.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Loss;
use crate::error::{HarnessError, Result};

/// What the output layer is trained against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Per-coordinate regression loss, averaged over coordinates and batch.
    Regression(Loss),
    /// Softmax cross-entropy; targets are one-hot rows.
    Classification,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub w1: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DMatrix<f64>,
}

/// Gradients with the same shapes as the parameters.
#[derive(Clone, Debug)]
pub struct Grads {
    pub w1: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DMatrix<f64>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(n_in: usize, hidden: usize, n_out: usize, rng: &mut R) -> Self {
        let mut glorot = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-a..a))
        };
        let w1 = glorot(hidden, n_in);
        let w2 = glorot(n_out, hidden);
        Mlp {
            w1,
            b1: DMatrix::zeros(1, hidden),
            w2,
            b2: DMatrix::zeros(1, n_out),
        }
    }

    pub fn zeros(n_in: usize, hidden: usize, n_out: usize) -> Self {
        Mlp {
            w1: DMatrix::zeros(hidden, n_in),
            b1: DMatrix::zeros(1, hidden),
            w2: DMatrix::zeros(n_out, hidden),
            b2: DMatrix::zeros(1, n_out),
        }
    }

    pub fn n_in(&self) -> usize {
        self.w1.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.w2.nrows()
    }

    fn hidden(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut a = x * self.w1.transpose();
        for mut row in a.row_iter_mut() {
            row += &self.b1;
        }
        a.map(f64::tanh)
    }

    fn head(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = h * self.w2.transpose();
        for mut row in y.row_iter_mut() {
            row += &self.b2;
        }
        y
    }

    /// Raw outputs (logits for a classifier).
    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.head(&self.hidden(x))
    }

    /// Row-wise softmax of the outputs.
    pub fn probabilities(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = self.forward(x);
        softmax_rows(&mut y);
        y
    }

    pub fn loss(&self, x: &DMatrix<f64>, t: &DMatrix<f64>, obj: Objective) -> f64 {
        self.loss_and_grad(x, t, obj).0
    }

    pub fn loss_and_grad(&self, x: &DMatrix<f64>, t: &DMatrix<f64>, obj: Objective) -> (f64, Grads) {
        let batch = x.nrows() as f64;
        let h = self.hidden(x);
        let mut y = self.head(&h);
        let (loss, dy) = match obj {
            Objective::Regression(kind) => {
                let n = batch * y.ncols() as f64;
                let diff = &y - t;
                match kind {
                    Loss::L2 => (diff.norm_squared() / n, diff * (2.0 / n)),
                    Loss::L1 => (
                        diff.abs().sum() / n,
                        diff.map(|d| if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 } / n),
                    ),
                }
            }
            Objective::Classification => {
                softmax_rows(&mut y);
                let mut loss = 0.0;
                for (p, q) in y.row_iter().zip(t.row_iter()) {
                    for (pi, qi) in p.iter().zip(q.iter()) {
                        if *qi > 0.0 {
                            loss -= qi * pi.max(f64::MIN_POSITIVE).ln();
                        }
                    }
                }
                (loss / batch, (&y - t) / batch)
            }
        };
        let w2 = dy.transpose() * &h;
        let b2 = row_sums(&dy);
        let dh = &dy * &self.w2;
        let da = dh.zip_map(&h, |g, hv| g * (1.0 - hv * hv));
        let w1 = da.transpose() * x;
        let b1 = row_sums(&da);
        (loss, Grads { w1, b1, w2, b2 })
    }

    pub fn params(&self) -> [&DMatrix<f64>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn params_mut(&mut self) -> [&mut DMatrix<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn to_record(&self) -> MlpRecord {
        let rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        MlpRecord {
            n_in: self.n_in(),
            hidden: self.w1.nrows(),
            n_out: self.n_out(),
            w1: rows(&self.w1),
            b1: self.b1.iter().copied().collect(),
            w2: rows(&self.w2),
            b2: self.b2.iter().copied().collect(),
        }
    }

    pub fn from_record(r: &MlpRecord) -> Result<Self> {
        let mat = |rows: &Vec<Vec<f64>>, nr: usize, nc: usize, name: &str| {
            if rows.len() != nr || rows.iter().any(|row| row.len() != nc) {
                return Err(HarnessError::Model(format!("{name} must be {nr}x{nc}")));
            }
            Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
        };
        let vec = |v: &Vec<f64>, n: usize, name: &str| {
            if v.len() != n {
                return Err(HarnessError::Model(format!("{name} must have {n} entries")));
            }
            Ok(DMatrix::from_row_slice(1, n, v))
        };
        Ok(Mlp {
            w1: mat(&r.w1, r.hidden, r.n_in, "w1")?,
            b1: vec(&r.b1, r.hidden, "b1")?,
            w2: mat(&r.w2, r.n_out, r.hidden, "w2")?,
            b2: vec(&r.b2, r.n_out, "b2")?,
        })
    }
}

/// Serialized network weights (row-major matrices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpRecord {
    pub n_in: usize,
    pub hidden: usize,
    pub n_out: usize,
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

fn row_sums(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(1, m.ncols(), |_, j| m.column(j).sum())
}

fn softmax_rows(y: &mut DMatrix<f64>) {
    for mut row in y.row_iter_mut() {
        let max = row.max();
        row.apply(|v| *v = (*v - max).exp());
        let s = row.sum();
        row /= s;
    }
}

#[derive(Clone, Debug)]
pub struct Adam {
    m: Vec<DMatrix<f64>>,
    v: Vec<DMatrix<f64>>,
    step: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(net: &Mlp) -> Self {
        let zeros: Vec<DMatrix<f64>> = net
            .params()
            .iter()
            .map(|p| DMatrix::zeros(p.nrows(), p.ncols()))
            .collect();
        Adam {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn update(&mut self, net: &mut Mlp, g: &Grads, lr: f64) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        let grads = [&g.w1, &g.b1, &g.w2, &g.b2];
        for (i, p) in net.params_mut().into_iter().enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            m.zip_apply(grads[i], |mi, gi| *mi = Self::BETA1 * *mi + (1.0 - Self::BETA1) * gi);
            v.zip_apply(grads[i], |vi, gi| *vi = Self::BETA2 * *vi + (1.0 - Self::BETA2) * gi * gi);
            for ((pi, mi), vi) in p.iter_mut().zip(m.iter()).zip(v.iter()) {
                *pi -= lr * (mi / c1) / ((vi / c2).sqrt() + Self::EPS);
            }
        }
    }
}

/// Largest relative error between backpropagated and central-difference
/// gradients (step `1e-5`) over every parameter.
///
/// Relative error is `|a − n| / max(|a|, |n|, 1e-6)`: below `1e-6` both
/// gradients sit at the finite-difference noise floor and the absolute error
/// is used instead.
pub fn gradient_check(net: &Mlp, x: &DMatrix<f64>, t: &DMatrix<f64>, obj: Objective) -> f64 {
    const STEP: f64 = 1e-5;
    let (_, g) = net.loss_and_grad(x, t, obj);
    let analytic = [&g.w1, &g.b1, &g.w2, &g.b2];
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (k, grad) in analytic.iter().enumerate() {
        for idx in 0..grad.len() {
            let orig = probe.params()[k][idx];
            probe.params_mut()[k][idx] = orig + STEP;
            let plus = probe.loss(x, t, obj);
            probe.params_mut()[k][idx] = orig - STEP;
            let minus = probe.loss(x, t, obj);
            probe.params_mut()[k][idx] = orig;
            let numeric = (plus - minus) / (2.0 * STEP);
            let a = grad[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    worst
}
