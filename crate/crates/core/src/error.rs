use thiserror::Error;

use crate::so3::RigidMotion;

/// Errors produced by the rotation, symmetry, and PnP routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Matrix is too far from SO(3) to be repaired by re-orthonormalization.
    #[error("matrix is not a rotation (orthonormality defect {defect:e}, det {det})")]
    NotARotation { defect: f64, det: f64 },
    #[error("invalid symmetry spec: {0}")]
    InvalidSpec(String),
    /// Generators do not close into a finite group below the element cap.
    #[error("group closure exceeded {cap} elements; generators do not produce a finite group")]
    GroupNotFinite { cap: usize },
    #[error("operation not supported for {kind} symmetry: {reason}")]
    UnsupportedKind { kind: &'static str, reason: String },
    #[error("box corner {corner} is at or behind the camera plane (depth {depth})")]
    BehindCamera { corner: usize, depth: f64 },
    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),
    /// Gauss-Newton refinement kept increasing the residual. Carries the best iterate.
    #[error("pose refinement did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, last: Box<RigidMotion> },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
