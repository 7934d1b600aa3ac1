//! Decomposable qubit maps Λ(X) = Φ₁(X) + Φ₂(Xᵀ) given by the Choi matrices
//! of the two completely positive parts.
//!
//! Choi convention: J(Φ) = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|), input factor first, so
//! Φ(X) = Tr_in[(Xᵀ ⊗ I)·J].

use num_complex::Complex64;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::matcore::{herm_fn, kron, partial_trace, CMatrix};
use crate::quantum::{phi_plus, random_ginibre, DensityMatrix};

use super::{CertifyError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiPair {
    pub j1: CMatrix,
    pub j2: CMatrix,
    /// Trace scaling: (Tr_out J1)ᵀ + Tr_out J2 = q·I.
    pub q: f64,
}

impl ChoiPair {
    pub fn new(j1: CMatrix, j2: CMatrix, q: f64) -> Result<Self> {
        for (name, j) in [("J1", &j1), ("J2", &j2)] {
            if j.rows() != 4 || !j.is_square() {
                return Err(CertifyError::Malformed(format!("{name} must be 4x4")));
            }
        }
        Ok(Self { j1, j2, q })
    }

    /// Λ = identity.
    pub fn identity() -> Self {
        Self {
            j1: CMatrix::projector(&phi_plus()).scale(2.0),
            j2: CMatrix::zeros(4, 4),
            q: 1.0,
        }
    }

    /// Λ = transposition.
    pub fn transpose() -> Self {
        Self {
            j1: CMatrix::zeros(4, 4),
            j2: CMatrix::projector(&phi_plus()).scale(2.0),
            q: 1.0,
        }
    }

    /// (Tr_out J1)ᵀ + Tr_out J2, which equals q·I for a scaled
    /// trace-preserving map.
    pub fn trace_operator(&self) -> CMatrix {
        let t1 = partial_trace(&self.j1, &[2, 2], &[0]).expect("4x4 Choi").transpose();
        let t2 = partial_trace(&self.j2, &[2, 2], &[0]).expect("4x4 Choi");
        &t1 + &t2
    }

    /// Largest entrywise deviation of the trace operator from q·I.
    pub fn trace_preservation_error(&self) -> f64 {
        self.trace_operator().max_abs_diff(&CMatrix::identity(2).scale(self.q))
    }

    /// Λ(X) for any 2×2 matrix X.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        &choi_apply(&self.j1, &x.transpose()) + &choi_apply(&self.j2, x)
    }

    /// Λ†(E) = (Tr_out[(I⊗E)J1])ᵀ + Tr_out[(I⊗E)J2].
    pub fn adjoint(&self, e: &CMatrix) -> CMatrix {
        let ie = kron(&CMatrix::identity(2), e);
        let a1 = partial_trace(&(&ie * &self.j1), &[2, 2], &[0])
            .expect("4x4")
            .transpose();
        let a2 = partial_trace(&(&ie * &self.j2), &[2, 2], &[0]).expect("4x4");
        (&a1 + &a2).hermitian_part()
    }
}

/// Tr_in[(Xᵀ ⊗ I)·J] evaluated with the already transposed argument `xt`.
pub(crate) fn choi_apply(j: &CMatrix, xt: &CMatrix) -> CMatrix {
    let op = &kron(xt, &CMatrix::identity(2)) * j;
    partial_trace(&op, &[2, 2], &[1]).expect("4x4")
}

/// Applies a qubit map to qubit `k` of an n-qubit operator.
pub fn apply_on_qubit(map: impl Fn(&CMatrix) -> CMatrix, m: &CMatrix, n_qubits: usize, k: usize) -> Result<CMatrix> {
    let d = 1usize << n_qubits;
    if m.rows() != d || m.cols() != d || k >= n_qubits {
        return Err(CertifyError::Malformed(format!(
            "cannot apply a qubit map to qubit {k} of a {}x{} operator",
            m.rows(),
            m.cols()
        )));
    }
    let shift = n_qubits - 1 - k;
    let bit = 1usize << shift;
    let mut out = CMatrix::zeros(d, d);
    for i in 0..2 {
        for j in 0..2 {
            let mut unit = CMatrix::zeros(2, 2);
            unit[(i, j)] = Complex64::new(1.0, 0.0);
            let img = map(&unit);
            // out[(r', c')] += m[(r, c)]·img[(a, b)] where r, c carry bits i, j
            // at position k, replaced by a, b in the output.
            for r in (0..d).filter(|r| (r >> shift) & 1 == i) {
                for c in (0..d).filter(|c| (c >> shift) & 1 == j) {
                    let v = m[(r, c)];
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..2 {
                        for b in 0..2 {
                            let w = img[(a, b)];
                            if w != Complex64::new(0.0, 0.0) {
                                let rr = (r & !bit) | (a << shift);
                                let cc = (c & !bit) | (b << shift);
                                out[(rr, cc)] += v * w;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Applies Λ to the chosen qubit of a multi-qubit state.
pub fn apply_positive_map(choi: &ChoiPair, rho: &DensityMatrix, on_subsystem: usize) -> Result<CMatrix> {
    if rho.dims().iter().any(|&d| d != 2) {
        return Err(CertifyError::Malformed(
            "positive maps act on qubit registers only".into(),
        ));
    }
    apply_on_qubit(|x| choi.apply(x), rho.matrix(), rho.dims().len(), on_subsystem)
}

/// Random positive trace-preserving map: Ginibre PSD Choi matrices rescaled so
/// that the trace operator becomes the identity.
pub fn random_positive_tp_map(rng_seed: u64) -> ChoiPair {
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(rng_seed);
    let g1 = random_ginibre(4, 4, &mut rng);
    let g2 = random_ginibre(4, 4, &mut rng);
    let j1 = (&g1 * &g1.adjoint()).hermitian_part();
    let j2 = (&g2 * &g2.adjoint()).hermitian_part();
    let raw = ChoiPair { j1, j2, q: 1.0 };
    let t = raw.trace_operator().hermitian_part();
    let s = herm_fn(&t, |v| 1.0 / v.sqrt()).expect("trace operator is positive definite");
    // (Sᵀ⊗I) J1 (S̄⊗I) and (S⊗I) J2 (S⊗I) give S·T·S = I.
    let id = CMatrix::identity(2);
    let k1 = kron(&s.transpose(), &id);
    let k2 = kron(&s, &id);
    ChoiPair {
        j1: raw.j1.conjugate_by(&k1).hermitian_part(),
        j2: raw.j2.conjugate_by(&k2).hermitian_part(),
        q: 1.0,
    }
}
