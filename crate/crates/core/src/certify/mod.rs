//! Locality and unsteerability certificates.
//!
//! * [`lhv_certificate`]: largest white-noise admixture parameter η for which
//!   a two-qubit state decomposes as a positive map applied to the isotropic
//!   reference state plus a PPT remainder.
//! * [`lhs_certificate`] and [`povm_noise_robustness`]: the local-hidden-state
//!   and joint-measurability SDPs over deterministic response functions.

mod choi;
mod lhv;
mod steering;

pub use choi::{apply_on_qubit, apply_positive_map, random_positive_tp_map, ChoiPair};
pub use lhv::{
    lhv_certificate, lhv_certificate_with, verify_certificate, CertificateCheck, CertificateResidues,
    CertificateResult, ETA_CAP, LHV_REFERENCE_ALPHA,
};
pub use steering::{
    lhs_certificate, noise_robustness, povm_noise_robustness, Assemblage, LhsResult, RobustnessResult, MAX_STRATEGIES,
    ROBUSTNESS_CAP, UNSTEERABLE_TOL,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::QuantumError;
use crate::sdp::{SdpSolution, SdpStatus};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("solver stopped with {status:?} after {iterations} iterations (gap {gap:.3e}, residual {residual:.3e})")]
    Solver {
        status: SdpStatus,
        iterations: usize,
        gap: f64,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, CertifyError>;

/// Solver summary carried alongside every certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub status: SdpStatus,
    pub iterations: usize,
    pub objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub max_residual: f64,
    pub min_eigenvalue: f64,
}

impl From<&SdpSolution> for SolverDiagnostics {
    fn from(s: &SdpSolution) -> Self {
        Self {
            status: s.status,
            iterations: s.iterations,
            objective: s.objective,
            dual_objective: s.dual_objective,
            duality_gap: s.duality_gap,
            max_residual: s.max_residual,
            min_eigenvalue: s.min_eigenvalue,
        }
    }
}

pub(crate) fn require_optimal(s: &SdpSolution) -> Result<()> {
    if s.is_optimal() {
        Ok(())
    } else {
        Err(CertifyError::Solver {
            status: s.status,
            iterations: s.iterations,
            gap: s.duality_gap,
            residual: s.max_residual,
        })
    }
}
