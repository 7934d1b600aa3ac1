//! η certificate: maximise η subject to
//!
//! η·ρ + (1−η)·I/4 = (I ⊗ Λ̃)(W_ref) + R̃,   R̃ ⪰ 0,  R̃^{T₂} ⪰ 0,
//!
//! where Λ̃ = q·Λ is given by PSD Choi matrices with trace operator q·I and
//! Tr R̃ = 1 − q. Absorbing q into the Choi pair and the remainder keeps the
//! program linear.

use serde::{Deserialize, Serialize};

use crate::matcore::{min_eigenvalue, partial_transpose, CMatrix};
use crate::quantum::{isotropic_matrix, DensityMatrix};
use crate::sdp::{solve, LinearForm, MapTerm, SdpProblem, SolveOptions};

use super::choi::{apply_on_qubit, choi_apply};
use super::{require_optimal, CertifyError, ChoiPair, Result, SolverDiagnostics};

/// Isotropic-state visibility up to which a local hidden variable model for
/// all projective two-qubit measurements is known to exist. Imported from the
/// literature and not re-derived here.
pub const LHV_REFERENCE_ALPHA: f64 = 0.6875;

/// Upper bound on η. Without it the program is unbounded for ρ = I/4, where
/// the noise line degenerates to a point.
pub const ETA_CAP: f64 = 3.0;

/// Residual and positivity figures of a decomposition, recomputed from its
/// matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateResidues {
    /// max |η·ρ + (1−η)·I/4 − (I⊗Λ̃)(W_ref) − R̃| entrywise.
    pub reconstruction: f64,
    /// |Tr R̃ − (1 − q)|.
    pub remainder_trace: f64,
    /// Entrywise deviation of the Choi trace operator from q·I.
    pub trace_preservation: f64,
    pub min_eig_j1: f64,
    pub min_eig_j2: f64,
    pub min_eig_remainder: f64,
    pub min_eig_remainder_pt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateResult {
    pub eta: f64,
    pub q: f64,
    pub choi: ChoiPair,
    /// Unnormalised PPT remainder R̃ with trace 1 − q.
    pub rho_ppt: CMatrix,
    pub residuals: CertificateResidues,
    pub solver: SolverDiagnostics,
}

impl CertificateResult {
    /// η ≥ 1: the state itself admits the decomposition.
    pub fn certifies_local(&self) -> bool {
        self.eta >= 1.0
    }
}

/// Outcome of an independent re-check of a certificate against a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub residues: CertificateResidues,
    pub issues: Vec<String>,
}

impl CertificateCheck {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

pub fn lhv_certificate(rho_exp: &DensityMatrix) -> Result<CertificateResult> {
    lhv_certificate_with(rho_exp, &SolveOptions::default())
}

pub fn lhv_certificate_with(rho_exp: &DensityMatrix, opts: &SolveOptions) -> Result<CertificateResult> {
    rho_exp.require_two_qubits()?;
    let rho = rho_exp.matrix().hermitian_part();
    let w_ref = isotropic_matrix(LHV_REFERENCE_ALPHA);
    let id4 = CMatrix::identity(4);
    let id2 = CMatrix::identity(2);

    let mut p = SdpProblem::new();
    let j1 = p.add_hermitian_block("J1", 4);
    let j2 = p.add_hermitian_block("J2", 4);
    let rem = p.add_hermitian_block("R", 4);
    let rem_pt = p.add_hermitian_block("R_pt", 4);
    let eta = p.add_scalar("eta", Some(0.0), Some(ETA_CAP));
    let q = p.add_scalar("q", Some(0.0), Some(1.0));

    // η(ρ − I/4) − (I⊗Λ̃)(W_ref) − R̃ = −I/4
    let via_j1 = |j: &CMatrix| {
        apply_on_qubit(|x| choi_apply(j, &x.transpose()), &w_ref, 2, 1)
            .expect("4x4")
            .scale(-1.0)
    };
    let via_j2 = |j: &CMatrix| {
        apply_on_qubit(|x| choi_apply(j, x), &w_ref, 2, 1)
            .expect("4x4")
            .scale(-1.0)
    };
    let neg = |m: &CMatrix| m.scale(-1.0);
    p.add_hermitian_equality(
        "decomposition",
        &[
            MapTerm { var: j1, map: &via_j1 },
            MapTerm { var: j2, map: &via_j2 },
            MapTerm { var: rem, map: &neg },
        ],
        &[(eta, &rho - &id4.scale(0.25))],
        &id4.scale(-0.25),
    );

    // (Tr_out J1)ᵀ + Tr_out J2 − q·I = 0
    let tr1 = |j: &CMatrix| {
        crate::matcore::partial_trace(j, &[2, 2], &[0])
            .expect("4x4")
            .transpose()
    };
    let tr2 = |j: &CMatrix| crate::matcore::partial_trace(j, &[2, 2], &[0]).expect("4x4");
    p.add_hermitian_equality(
        "trace preservation",
        &[MapTerm { var: j1, map: &tr1 }, MapTerm { var: j2, map: &tr2 }],
        &[(q, id2.scale(-1.0))],
        &CMatrix::zeros(2, 2),
    );

    p.add_constraint(
        "remainder trace",
        LinearForm::new().hermitian(rem, &id4).scalar(q, 1.0),
        1.0,
    );

    // R̃^{T₂} − P = 0 with P ⪰ 0.
    let pt = |m: &CMatrix| partial_transpose(m, &[2, 2], 1).expect("4x4");
    p.add_hermitian_equality(
        "remainder partial transpose",
        &[MapTerm { var: rem, map: &pt }, MapTerm { var: rem_pt, map: &neg }],
        &[],
        &CMatrix::zeros(4, 4),
    );

    p.set_objective(LinearForm::new().scalar(eta, 1.0));

    let sol = solve(&p, opts);
    require_optimal(&sol)?;

    let choi = ChoiPair {
        j1: sol.hermitian(j1),
        j2: sol.hermitian(j2),
        q: sol.scalar(q),
    };
    let rho_ppt = sol.hermitian(rem);
    let eta_v = sol.scalar(eta);
    let residuals = residues(&rho, eta_v, &choi, &rho_ppt);
    Ok(CertificateResult {
        eta: eta_v,
        q: choi.q,
        choi,
        rho_ppt,
        residuals,
        solver: SolverDiagnostics::from(&sol),
    })
}

fn residues(rho: &CMatrix, eta: f64, choi: &ChoiPair, rho_ppt: &CMatrix) -> CertificateResidues {
    let w_ref = isotropic_matrix(LHV_REFERENCE_ALPHA);
    let mapped = apply_on_qubit(|x| choi.apply(x), &w_ref, 2, 1).expect("4x4");
    let mut lhs = rho.scale(eta);
    lhs += &CMatrix::identity(4).scale((1.0 - eta) / 4.0);
    let rhs = &mapped + rho_ppt;
    let min_eig = |m: &CMatrix| min_eigenvalue(&m.hermitian_part()).unwrap_or(f64::NAN);
    CertificateResidues {
        reconstruction: lhs.max_abs_diff(&rhs),
        remainder_trace: (rho_ppt.trace().re - (1.0 - choi.q)).abs(),
        trace_preservation: choi.trace_preservation_error(),
        min_eig_j1: min_eig(&choi.j1),
        min_eig_j2: min_eig(&choi.j2),
        min_eig_remainder: min_eig(rho_ppt),
        min_eig_remainder_pt: min_eig(&partial_transpose(rho_ppt, &[2, 2], 1).expect("4x4")),
    }
}

/// Recomputes every residual of `cert` against `rho_exp` without solving.
/// The decomposition must hold to 1e-7 entrywise and all positivity
/// conditions to −1e-8.
pub fn verify_certificate(cert: &CertificateResult, rho_exp: &DensityMatrix) -> Result<CertificateCheck> {
    rho_exp.require_two_qubits()?;
    for (name, m) in [("J1", &cert.choi.j1), ("J2", &cert.choi.j2), ("rho_ppt", &cert.rho_ppt)] {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(CertifyError::Malformed(format!("{name} must be 4x4")));
        }
    }
    let r = residues(rho_exp.matrix(), cert.eta, &cert.choi, &cert.rho_ppt);
    let mut issues = Vec::new();
    let eq_tol = 1e-7;
    let psd_tol = 1e-8;
    if !(r.reconstruction <= eq_tol) {
        issues.push(format!("decomposition residual {:.3e}", r.reconstruction));
    }
    if !(r.remainder_trace <= eq_tol) {
        issues.push(format!("remainder trace off by {:.3e}", r.remainder_trace));
    }
    if !(r.trace_preservation <= eq_tol) {
        issues.push(format!("trace operator off by {:.3e}", r.trace_preservation));
    }
    for (name, e) in [
        ("J1", r.min_eig_j1),
        ("J2", r.min_eig_j2),
        ("remainder", r.min_eig_remainder),
        ("remainder partial transpose", r.min_eig_remainder_pt),
    ] {
        if !(e >= -psd_tol) {
            issues.push(format!("{name} has eigenvalue {e:.3e}"));
        }
    }
    if (cert.q - cert.choi.q).abs() > 0.0 {
        issues.push("q differs from the Choi pair's q".into());
    }
    if !(-psd_tol..=1.0 + psd_tol).contains(&cert.q) {
        issues.push(format!("q = {} outside [0, 1]", cert.q));
    }
    Ok(CertificateCheck { residues: r, issues })
}
