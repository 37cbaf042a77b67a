//! Eigenvalue reports, droop sweeps with crossing detection, and pole
//! placement by state feedback.

mod place;
mod report;
mod sweep;

pub use place::{
    place_poles, verify_placement, PlacementResult, VerifyReport, PLACEMENT_TOLERANCE,
    STRICT_TOLERANCE,
};
pub use report::{
    damping_ratio, eigen_report, propose_targets, propose_targets_from, report_from_eigenvalues,
    EigenEntry, EigenReport, ZERO_MODE_TOL,
};
pub use sweep::{
    detect_crossing, droop_sweep, sweep_values, Crossing, CrossingDirection, CrossingKind,
    SweepPoint, SweepResult,
};

use crate::linalg::{CScalar, LinalgError};
use crate::network::NetworkError;
use crate::sstate::LtiError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilityError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("empty sweep range: from {from}, to {to}, step {step}")]
    InvalidRange { from: f64, to: f64, step: f64 },
    #[error("expected {expected} target poles, got {got}")]
    TargetCountMismatch { expected: usize, got: usize },
    #[error("target {0} has no conjugate partner")]
    NotConjugateClosed(CScalar),
    #[error("mode {mode} is uncontrollable and is not among the targets")]
    Uncontrollable { mode: CScalar },
    #[error("eigenvector matrix is ill-conditioned (condition estimate {cond:e})")]
    IllConditioned { cond: f64 },
    #[error("input matrix does not have full column rank")]
    RankDeficientInput,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
