//! Desk-scale pose regression experiments on symmetric objects.
//!
//! A tiny network regresses the 8 projected box corners from invariant
//! features of a synthetic symmetric scene; PnP turns the corners back into a
//! pose. Three target conventions are compared: raw ground-truth poses, poses
//! canonicalized by [`symcanon::map`], and region-aware canonicalization by
//! [`symcanon::map_prime`] with one regressor per region and a classifier to
//! pick between them.

pub mod config;
pub mod error;
pub mod net;
pub mod report;
pub mod scene;
pub mod train;

pub use config::{HarnessConfig, Loss, Mode};
pub use error::{HarnessError, Result};
pub use net::{gradient_check, Adam, Mlp, Objective};
pub use report::{EpochRecord, HarnessReport, Summary};
pub use scene::{make_dataset, Sample, Scene};
pub use train::{datasets, infer, prepare, rotation_error, run, train, ModelFile, Prepared, Trained};
