//! Two-qubit nonlocality and entanglement tests: the Horodecki CHSH bound,
//! the PPT criterion and direct CHSH evaluation.

use serde::{Deserialize, Serialize};

use crate::matcore::{kron, min_eigenvalue, partial_transpose, pauli, RMatrix};
use crate::quantum::{DensityMatrix, Observable, QuantumError, Result};

/// Values above 2 + this margin count as a CHSH violation.
pub const VIOLATION_MARGIN: f64 = 1e-9;

/// Threshold on the smallest eigenvalue of ρ^{T₂} below which a state is
/// entangled.
pub const PPT_TOL: f64 = 1e-10;

/// t_ij = Tr[ρ (σ_i ⊗ σ_j)] for i, j ∈ {X, Y, Z}.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(pub RMatrix);

impl CorrelationMatrix {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Eigenvalues of T·Tᵀ in descending order.
    pub fn ttt_eigenvalues(&self) -> Vec<f64> {
        let t = &self.0;
        let mut v = (t * &t.transpose()).sym_eigvals();
        v.reverse();
        v
    }
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(QuantumError::InvalidState(format!(
            "expected a two-qubit state, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

pub fn correlation_matrix(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    require_two_qubits(rho)?;
    let s = pauli::xyz();
    Ok(CorrelationMatrix(RMatrix::from_fn(3, 3, |i, j| {
        rho.expectation(&kron(&s[i], &s[j]))
    })))
}

/// Maximal CHSH value over projective measurements, 2√(m₁ + m₂).
pub fn horodecki_max_chsh(rho: &DensityMatrix) -> Result<f64> {
    let m = correlation_matrix(rho)?.ttt_eigenvalues();
    Ok(2.0 * (m[0].max(0.0) + m[1].max(0.0)).sqrt())
}

pub fn violates_chsh(value: f64) -> bool {
    value > 2.0 + VIOLATION_MARGIN
}

/// Bloch vectors (a₀, a₁, b₀, b₁) reaching the Horodecki bound with
/// CHSH = ⟨A₀B₀⟩ + ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₁B₁⟩.
pub fn horodecki_settings(rho: &DensityMatrix) -> Result<[[f64; 3]; 4]> {
    let t = correlation_matrix(rho)?.0;
    // Eigenvectors of TᵀT give Bob's plane; T maps them to Alice's directions.
    let (vals, vecs) = (&t.transpose() * &t).sym_eig();
    let c1 = [vecs[(0, 2)], vecs[(1, 2)], vecs[(2, 2)]];
    let c2 = [vecs[(0, 1)], vecs[(1, 1)], vecs[(2, 1)]];
    let (m1, m2) = (vals[2].max(0.0), vals[1].max(0.0));
    let apply = |v: [f64; 3]| [0, 1, 2].map(|i| (0..3).map(|j| t[(i, j)] * v[j]).sum::<f64>());
    let unit = |v: [f64; 3], fallback: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-14 {
            v.map(|x| x / n)
        } else {
            fallback
        }
    };
    let a0 = unit(apply(c1), [0.0, 0.0, 1.0]);
    let a1 = unit(apply(c2), orthogonal_to(a0));
    let theta = if m1 + m2 > 0.0 {
        m2.sqrt().atan2(m1.sqrt())
    } else {
        std::f64::consts::FRAC_PI_4
    };
    let (c, s) = (theta.cos(), theta.sin());
    let b0 = [0, 1, 2].map(|k| c * c1[k] + s * c2[k]);
    let b1 = [0, 1, 2].map(|k| c * c1[k] - s * c2[k]);
    Ok([a0, a1, b0, b1])
}

fn orthogonal_to(v: [f64; 3]) -> [f64; 3] {
    let w = if v[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let d = v[0] * w[0] + v[1] * w[1] + v[2] * w[2];
    let u = [w[0] - d * v[0], w[1] - d * v[1], w[2] - d * v[2]];
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.map(|x| x / n)
}

/// Smallest eigenvalue of ρ^{T₂} and whether the state is separable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub separable: bool,
    pub min_eig: f64,
}

pub fn ppt_check(rho: &DensityMatrix) -> Result<PptReport> {
    require_two_qubits(rho)?;
    let pt = partial_transpose(rho.matrix(), &[2, 2], 1)?;
    let min_eig = min_eigenvalue(&pt)?;
    Ok(PptReport {
        separable: min_eig >= -PPT_TOL,
        min_eig,
    })
}

/// ⟨A₀B₀⟩ + ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₁B₁⟩.
pub fn chsh_value(rho: &DensityMatrix, alice: [&Observable; 2], bob: [&Observable; 2]) -> Result<f64> {
    require_two_qubits(rho)?;
    for o in alice.iter().chain(bob.iter()) {
        o.require_dichotomic()?;
    }
    let e = |a: &Observable, b: &Observable| rho.expectation(&kron(a.matrix(), b.matrix()));
    Ok(e(alice[0], bob[0]) + e(alice[0], bob[1]) + e(alice[1], bob[0]) - e(alice[1], bob[1]))
}

/// Combined Horodecki/PPT summary for a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub max_chsh: f64,
    pub chsh_violation: bool,
    pub ppt: PptReport,
    pub correlation_matrix: [[f64; 3]; 3],
}

pub fn witness_report(rho: &DensityMatrix) -> Result<WitnessReport> {
    let t = correlation_matrix(rho)?;
    let max_chsh = horodecki_max_chsh(rho)?;
    Ok(WitnessReport {
        max_chsh,
        chsh_violation: violates_chsh(max_chsh),
        ppt: ppt_check(rho)?,
        correlation_matrix: [0, 1, 2].map(|i| [0, 1, 2].map(|j| t.entry(i, j))),
    })
}
