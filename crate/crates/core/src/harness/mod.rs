//! Monte Carlo error propagation, parameter sweeps and the command-line
//! surface.

pub mod cli;
pub mod io;
mod montecarlo;
mod noise;
mod sweep;

pub use montecarlo::{
    reference_row, run_montecarlo, run_trial, summarize, ColumnSummary, MontecarloConfig, MontecarloReport,
    ReferenceRow, Summary, TrialRecord, REFERENCE_ROWS,
};
pub use noise::{analyser_projectors, nominal_angles, perturbed_bases, waveplate, NoiseModel, Plate};
pub use sweep::{parse_alphas, sweep_alpha, SweepRow};

use std::path::PathBuf;

use thiserror::Error;

use crate::broadcast::BroadcastError;
use crate::certify::CertifyError;
use crate::quantum::QuantumError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Broadcast(#[from] BroadcastError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<HarnessError>,
    },
}

impl HarnessError {
    /// True when the root cause is an SDP that did not reach optimality.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            HarnessError::Certify(CertifyError::Solver { .. }) => true,
            HarnessError::Trial { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
