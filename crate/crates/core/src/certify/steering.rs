//! White-noise robustness over deterministic response functions.
//!
//! Given operator families {E_{o|s}} with a common sum M, find PSD operators
//! G_λ, one per deterministic strategy λ: s ↦ o, and the largest t ∈ [0, 1]
//! with Σ_{λ(s)=o} G_λ = t·E_{o|s} + (1−t)·Tr(E_{o|s})·I/2 for every (s, o).
//! For POVMs this is joint measurability of the noisy effects; for an
//! assemblage it is a local-hidden-state model of the noisy assemblage.

use serde::{Deserialize, Serialize};

use crate::matcore::{min_eigenvalue, CMatrix};
use crate::quantum::Povm;
use crate::sdp::{solve, LinearForm, MapTerm, SdpProblem, SolveOptions};

use super::{require_optimal, CertifyError, Result, SolverDiagnostics};

/// Largest number of deterministic strategies enumerated.
pub const MAX_STRATEGIES: usize = 4096;

/// t at or above 1 − this counts as admitting a local model.
pub const UNSTEERABLE_TOL: f64 = 1e-6;

const PSD_TOL: f64 = 1e-10;
const MARGINAL_TOL: f64 = 1e-9;
const ZERO_EFFECT: f64 = 1e-14;

/// Upper end of the search range for t. Values above 1 are reported as
/// spare margin. Capping at exactly 1 would make the bound active at the
/// compatibility threshold, where the optimum turns degenerate and the
/// interior-point iteration stalls.
pub const ROBUSTNESS_CAP: f64 = 10.0;

/// Conditional qubit operators σ_{o|s}, outer index the setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssemblageJson", into = "AssemblageJson")]
pub struct Assemblage {
    sigma: Vec<Vec<CMatrix>>,
}

#[derive(Serialize, Deserialize)]
struct AssemblageJson {
    settings: Vec<Vec<CMatrix>>,
}

impl TryFrom<AssemblageJson> for Assemblage {
    type Error = CertifyError;
    fn try_from(j: AssemblageJson) -> Result<Self> {
        Assemblage::new(j.settings)
    }
}

impl From<Assemblage> for AssemblageJson {
    fn from(a: Assemblage) -> Self {
        Self { settings: a.sigma }
    }
}

impl Assemblage {
    /// Validates shapes, positivity (1e-10) and that every setting has the
    /// same marginal Σ_o σ_{o|s} (1e-9).
    pub fn new(sigma: Vec<Vec<CMatrix>>) -> Result<Self> {
        if sigma.is_empty() || sigma.iter().any(|s| s.is_empty()) {
            return Err(CertifyError::Malformed(
                "assemblage needs at least one setting and outcome".into(),
            ));
        }
        for (s, ops) in sigma.iter().enumerate() {
            for (o, m) in ops.iter().enumerate() {
                if m.rows() != 2 || m.cols() != 2 {
                    return Err(CertifyError::Malformed(format!("sigma[{s}][{o}] is not 2x2")));
                }
                if !m.is_hermitian(PSD_TOL) {
                    return Err(CertifyError::Malformed(format!("sigma[{s}][{o}] is not Hermitian")));
                }
                let e = min_eigenvalue(&m.hermitian_part()).map_err(|e| CertifyError::Malformed(e.to_string()))?;
                if e < -PSD_TOL {
                    return Err(CertifyError::Malformed(format!(
                        "sigma[{s}][{o}] has eigenvalue {e:.3e}"
                    )));
                }
            }
        }
        let a = Self { sigma };
        let m0 = a.marginal(0);
        for s in 1..a.num_settings() {
            let d = a.marginal(s).max_abs_diff(&m0);
            if d > MARGINAL_TOL {
                return Err(CertifyError::Malformed(format!(
                    "marginal of setting {s} differs from setting 0 by {d:.3e}"
                )));
            }
        }
        Ok(a)
    }

    pub fn num_settings(&self) -> usize {
        self.sigma.len()
    }

    pub fn num_outcomes(&self, s: usize) -> usize {
        self.sigma[s].len()
    }

    pub fn sigma(&self, s: usize, o: usize) -> &CMatrix {
        &self.sigma[s][o]
    }

    pub fn settings(&self) -> &[Vec<CMatrix>] {
        &self.sigma
    }

    /// Σ_o σ_{o|s}.
    pub fn marginal(&self, s: usize) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        for op in &self.sigma[s] {
            m += op;
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessResult {
    /// Largest admissible noise parameter t, at most [`ROBUSTNESS_CAP`].
    /// The family is compatible iff t ≥ 1.
    pub t: f64,
    pub strategies: usize,
    pub solver: SolverDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhsResult {
    pub unsteerable: bool,
    pub noise_margin: f64,
    pub strategies: usize,
    pub solver: SolverDiagnostics,
}

/// Local-hidden-state test: t for the assemblage mixed with
/// (1−t)·Tr(σ)·I/2, and whether t reaches 1.
pub fn lhs_certificate(assemblage: &Assemblage) -> Result<LhsResult> {
    let r = noise_robustness(assemblage.settings(), &SolveOptions::default())?;
    Ok(LhsResult {
        unsteerable: r.t >= 1.0 - UNSTEERABLE_TOL,
        noise_margin: r.t,
        strategies: r.strategies,
        solver: r.solver,
    })
}

/// Joint-measurability robustness of qubit POVMs under
/// E ↦ t·E + (1−t)·Tr(E)·I/2.
pub fn povm_noise_robustness(povms: &[Povm]) -> Result<RobustnessResult> {
    if povms.iter().any(|p| p.dim() != 2) {
        return Err(CertifyError::Malformed("robustness is defined for qubit POVMs".into()));
    }
    let ops: Vec<Vec<CMatrix>> = povms.iter().map(|p| p.effects().to_vec()).collect();
    noise_robustness(&ops, &SolveOptions::default())
}

/// The shared SDP. Operators within a family must share a common sum;
/// outcomes with an all-zero operator are dropped before enumeration.
/// Strategies are numbered in mixed radix with setting 0 as the most
/// significant digit.
pub fn noise_robustness(families: &[Vec<CMatrix>], opts: &SolveOptions) -> Result<RobustnessResult> {
    if families.is_empty() {
        return Err(CertifyError::Malformed("no settings".into()));
    }
    let kept: Vec<Vec<&CMatrix>> = families
        .iter()
        .map(|f| f.iter().filter(|m| m.max_abs() > ZERO_EFFECT).collect())
        .collect();
    if kept.iter().any(|k| k.is_empty()) {
        return Err(CertifyError::Malformed("a setting has no nonzero outcome".into()));
    }
    for (s, k) in kept.iter().enumerate() {
        if k.iter().any(|m| m.rows() != 2 || m.cols() != 2) {
            return Err(CertifyError::Malformed(format!("setting {s} has a non-qubit operator")));
        }
    }
    let radix: Vec<usize> = kept.iter().map(Vec::len).collect();
    let n = radix
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k).filter(|&v| v <= MAX_STRATEGIES))
        .ok_or_else(|| CertifyError::Malformed(format!("more than {MAX_STRATEGIES} strategies")))?;

    let mut p = SdpProblem::new();
    let g: Vec<_> = (0..n).map(|l| p.add_hermitian_block(format!("G{l}"), 2)).collect();
    let t = p.add_scalar("t", Some(0.0), Some(ROBUSTNESS_CAP));

    let digit = |lambda: usize, s: usize| -> usize {
        let stride: usize = radix[s + 1..].iter().product();
        (lambda / stride) % radix[s]
    };
    let ident = |m: &CMatrix| m.clone();
    let id2 = CMatrix::identity(2);
    for (s, ops) in kept.iter().enumerate() {
        // The last outcome of later settings is implied by the common sum.
        let count = if s == 0 { ops.len() } else { ops.len() - 1 };
        for (o, e) in ops.iter().take(count).enumerate() {
            let terms: Vec<MapTerm<'_>> = (0..n)
                .filter(|&l| digit(l, s) == o)
                .map(|l| MapTerm { var: g[l], map: &ident })
                .collect();
            let e = e.hermitian_part();
            let noise = id2.scale(e.trace().re / 2.0);
            p.add_hermitian_equality(&format!("s{s}o{o}"), &terms, &[(t, (&noise - &e))], &noise);
        }
    }
    p.set_objective(LinearForm::new().scalar(t, 1.0));

    let sol = solve(&p, opts);
    require_optimal(&sol)?;
    Ok(RobustnessResult {
        t: sol.scalar(t),
        strategies: n,
        solver: SolverDiagnostics::from(&sol),
    })
}
