//! Run reports: per-epoch curves plus end-of-training diagnostics.

use serde::{Deserialize, Serialize};

use crate::config::{Loss, Mode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_rms_px: f64,
    /// Only measured on evaluation epochs.
    pub val_rot_err_rad: Option<f64>,
    /// Present when a region classifier is trained.
    pub clf_acc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Mean over validation samples of the quotient rotation error.
    pub val_rot_err_mean: f64,
    pub val_rot_err_median: f64,
    /// Corner RMS against the targets of the chart each sample was routed to.
    pub val_rms_px: f64,
    /// Corner RMS of predicting every corner at the ground-truth corner centroid.
    pub centroid_rms_px: f64,
    /// Raw mode only: RMS against the orbit-averaged corner targets.
    pub orbit_mean_rms_px: Option<f64>,
    pub pnp_failures: usize,
    pub clf_acc: Option<f64>,
    /// Accuracy on samples farther than the region band from a boundary.
    pub clf_acc_interior: Option<f64>,
    /// Samples whose canonical twist lies within the seam band of the chart wrap.
    pub seam_band_err_mean: Option<f64>,
    pub seam_band_err_median: Option<f64>,
    pub seam_interior_err_mean: Option<f64>,
    pub seam_interior_err_median: Option<f64>,
    /// Boundary-band samples sent to every wrong regressor.
    pub misrouted_forced_err_median: Option<f64>,
    pub misrouted_forced_count: usize,
    /// Samples the classifier actually routed to the wrong regressor.
    pub misrouted_actual_err_median: Option<f64>,
    pub misrouted_actual_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub mode: Mode,
    pub seed: u64,
    pub loss: Loss,
    pub epochs: Vec<EpochRecord>,
    pub summary: Summary,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl HarnessReport {
    /// `epoch,loss,val_rms_px,val_rot_err_rad,clf_acc`; unmeasured cells are empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss,val_rms_px,val_rot_err_rad,clf_acc\n");
        for e in &self.epochs {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                e.epoch,
                e.loss,
                e.val_rms_px,
                cell(e.val_rot_err_rad),
                cell(e.clf_acc)
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Final evaluated rotation error (the summary mean).
    pub fn final_rot_err(&self) -> f64 {
        self.summary.val_rot_err_mean
    }
}
