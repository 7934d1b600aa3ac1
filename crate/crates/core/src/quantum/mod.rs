//! States, observables, POVMs and channels for the two-qubit source and the
//! three-qubit broadcast network.
//!
//! Basis convention: |H⟩ ≡ |0⟩, |V⟩ ≡ |1⟩, tensor ordering HH, HV, VH, VV with
//! the first factor being the leftmost party.

pub mod tomography;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::broadcast::{Behavior, MeasurementSettings};
use crate::certify::Assemblage;
use crate::matcore::{self, herm_eig, kron, partial_trace, pauli, CMatrix, MatError, ONE, ZERO};

pub use tomography::{mle_reconstruct, simulate_tomography, MeasurementRecord};

/// Validation tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid observable `{label}`: {reason}")]
    InvalidObservable { label: String, reason: String },
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("measurement record is not informationally complete (rank {rank} < {needed})")]
    InformationallyIncomplete { rank: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, QuantumError>;

/// A validated density matrix together with its subsystem dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all at 1e-10).
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QuantumError::InvalidState(format!(
                "{}x{} is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if dims.iter().product::<usize>() != matrix.rows() {
            return Err(QuantumError::InvalidState(format!(
                "dims {dims:?} do not match dimension {}",
                matrix.rows()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(QuantumError::InvalidState(format!(
                "not Hermitian (deviation {dev:.3e})"
            )));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(QuantumError::InvalidState(format!("trace {tr} != 1")));
        }
        let min = matcore::min_eigenvalue(&matrix)?;
        if min < -STATE_TOL {
            return Err(QuantumError::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix, dims })
    }

    /// Qubit register of `n` qubits.
    pub fn qubits(matrix: CMatrix) -> Result<Self> {
        let n = matrix.rows();
        if !n.is_power_of_two() || n < 2 {
            return Err(QuantumError::InvalidState(format!(
                "dimension {n} is not a qubit register"
            )));
        }
        let dims = vec![2; n.trailing_zeros() as usize];
        Self::new(matrix, dims)
    }

    /// Pure state |ψ⟩⟨ψ|; the vector is normalised first.
    pub fn pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QuantumError::InvalidState("zero vector".into()));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(CMatrix::projector(&unit), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            matrix: CMatrix::identity(d).scale(1.0 / d as f64),
            dims,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        matcore::herm_eigvals(&self.matrix).expect("density matrices are Hermitian")
    }

    /// Convex combination w·self + (1-w)·other.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(QuantumError::InvalidState("mixing states of different shape".into()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(QuantumError::OutOfRange(format!("mixing weight {w}")));
        }
        let mut m = self.matrix.scale(w);
        m += &other.matrix.scale(1.0 - w);
        Self::new(m, self.dims.clone())
    }

    pub fn expectation(&self, op: &CMatrix) -> f64 {
        op.trace_product(&self.matrix).re
    }

    pub(crate) fn require_two_qubits(&self) -> Result<()> {
        if self.dims != [2, 2] {
            return Err(QuantumError::InvalidState(format!(
                "expected a two-qubit state, got dims {:?}",
                self.dims
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    dims: Vec<usize>,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = QuantumError;

    fn try_from(j: DensityMatrixJson) -> Result<Self> {
        let d: usize = j.dims.iter().product();
        let im = j.im.unwrap_or_else(|| vec![0.0; j.re.len()]);
        if j.re.len() != d * d || im.len() != d * d {
            return Err(QuantumError::InvalidState(format!(
                "expected {} entries for dims {:?}, got re={} im={}",
                d * d,
                j.dims,
                j.re.len(),
                im.len()
            )));
        }
        let data = j.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        Self::new(CMatrix::from_vec(d, d, data)?, j.dims)
    }
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(s: DensityMatrix) -> Self {
        Self {
            re: s.matrix.as_slice().iter().map(|z| z.re).collect(),
            im: Some(s.matrix.as_slice().iter().map(|z| z.im).collect()),
            dims: s.dims,
        }
    }
}

/// Hermitian observable with spectrum in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    label: String,
}

impl Observable {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let invalid = |reason: String| QuantumError::InvalidObservable {
            label: label.clone(),
            reason,
        };
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(invalid(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let matrix = matrix.hermitian_part();
        let vals = matcore::herm_eigvals(&matrix)?;
        if vals[0] < -1.0 - STATE_TOL || vals[vals.len() - 1] > 1.0 + STATE_TOL {
            return Err(invalid(format!("spectrum {vals:?} outside [-1, 1]")));
        }
        Ok(Self { matrix, label })
    }

    /// Qubit observable n·σ for a unit (or sub-unit) Bloch vector.
    pub fn bloch(n: [f64; 3], label: impl Into<String>) -> Result<Self> {
        Self::new(pauli::dot(n), label)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when every eigenvalue is ±1 and both signs occur, i.e. the
    /// observable describes a genuine two-outcome projective measurement.
    pub fn is_dichotomic(&self) -> bool {
        let vals = matcore::herm_eigvals(&self.matrix).expect("validated Hermitian");
        let tol = 1e-9;
        vals.iter().all(|v| (v.abs() - 1.0).abs() <= tol)
            && vals.iter().any(|&v| v > 0.0)
            && vals.iter().any(|&v| v < 0.0)
    }

    pub fn require_dichotomic(&self) -> Result<()> {
        if self.is_dichotomic() {
            Ok(())
        } else {
            Err(QuantumError::InvalidObservable {
                label: self.label.clone(),
                reason: "not a non-degenerate ±1 observable".into(),
            })
        }
    }

    /// Effects for outcome 0 (eigenvalue +1) and outcome 1 (eigenvalue -1):
    /// (I ± O)/2.
    pub fn projectors(&self) -> [CMatrix; 2] {
        let id = CMatrix::identity(self.matrix.rows());
        [(&id + &self.matrix).scale(0.5), (&id - &self.matrix).scale(0.5)]
    }
}

/// A list of PSD effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        if effects.is_empty() {
            return Err(QuantumError::InvalidPovm("no effects".into()));
        }
        if labels.len() != effects.len() {
            return Err(QuantumError::InvalidPovm(
                "label count does not match effect count".into(),
            ));
        }
        let d = effects[0].rows();
        let mut sum = CMatrix::zeros(d, d);
        for (e, l) in effects.iter().zip(&labels) {
            if e.rows() != d || !e.is_square() {
                return Err(QuantumError::InvalidPovm(format!("effect {l} has wrong shape")));
            }
            if e.hermitian_deviation() > STATE_TOL {
                return Err(QuantumError::InvalidPovm(format!("effect {l} is not Hermitian")));
            }
            let min = matcore::min_eigenvalue(&e.hermitian_part())?;
            if min < -STATE_TOL {
                return Err(QuantumError::InvalidPovm(format!(
                    "effect {l} has eigenvalue {min:.3e}"
                )));
            }
            sum += e;
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(d));
        if dev > 1e-9 {
            return Err(QuantumError::InvalidPovm(format!(
                "effects sum to identity only within {dev:.3e}"
            )));
        }
        let effects = effects.into_iter().map(|e| e.hermitian_part()).collect();
        Ok(Self { effects, labels })
    }

    /// Effects labelled by their index.
    pub fn unlabeled(effects: Vec<CMatrix>) -> Result<Self> {
        let labels = (0..effects.len()).map(|i| i.to_string()).collect();
        Self::new(effects, labels)
    }

    pub fn from_observable(obs: &Observable) -> Self {
        let [p, m] = obs.projectors();
        Self {
            effects: vec![p, m],
            labels: vec!["+".into(), "-".into()],
        }
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    /// Appends zero effects until the POVM has `outcomes` entries.
    pub fn padded(&self, outcomes: usize) -> Self {
        let mut out = self.clone();
        let d = self.dim();
        while out.effects.len() < outcomes {
            out.labels.push(format!("pad{}", out.effects.len()));
            out.effects.push(CMatrix::zeros(d, d));
        }
        out
    }
}

/// An isometry V: ℂ² → ℂ⁴.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
}

impl Isometry {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let vv = &matrix.adjoint() * &matrix;
        let dev = vv.max_abs_diff(&CMatrix::identity(matrix.cols()));
        if dev > 1e-12 {
            return Err(QuantumError::InvalidState(format!(
                "V†V deviates from identity by {dev:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// The adjoint channel applied to an operator on the output space: V†·M·V.
    pub fn pull_back(&self, m: &CMatrix) -> CMatrix {
        &(&self.matrix.adjoint() * m) * &self.matrix
    }
}

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// |Φ⁺⟩ = (|HH⟩ + |VV⟩)/√2.
pub fn phi_plus() -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![r(s), ZERO, ZERO, r(s)]
}

/// α|Φ⁺⟩⟨Φ⁺| + (1-α)I/4, valid for α ∈ [-1/3, 1].
pub fn isotropic_state(alpha: f64) -> Result<DensityMatrix> {
    if !(-1.0 / 3.0 - 1e-15..=1.0 + 1e-15).contains(&alpha) {
        return Err(QuantumError::OutOfRange(format!(
            "isotropic alpha {alpha} outside [-1/3, 1]"
        )));
    }
    Ok(DensityMatrix {
        matrix: isotropic_matrix(alpha),
        dims: vec![2, 2],
    })
}

/// The isotropic operator for any α, without range checks.
pub(crate) fn isotropic_matrix(alpha: f64) -> CMatrix {
    let mut m = CMatrix::projector(&phi_plus()).scale(alpha);
    m += &CMatrix::identity(4).scale((1.0 - alpha) / 4.0);
    m
}

/// Depolarizing channel with probability `p` on one qubit of a multi-qubit
/// state: (1-p)ρ + p·(I/2 on that qubit ⊗ the reduced state of the rest).
pub fn depolarize_qubit(rho: &DensityMatrix, qubit: usize, p: f64) -> Result<DensityMatrix> {
    if qubit >= rho.dims.len() || rho.dims[qubit] != 2 {
        return Err(QuantumError::OutOfRange(format!(
            "qubit index {qubit} for dims {:?}",
            rho.dims
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::OutOfRange(format!("depolarizing probability {p}")));
    }
    // I/2 ⊗ Tr_k(ρ) equals the Pauli twirl (1/4) Σ_P P_k ρ P_k.
    let mut twirled = CMatrix::zeros(rho.dim(), rho.dim());
    for p_k in [pauli::id2(), pauli::x(), pauli::y(), pauli::z()] {
        let op = embed_single(&p_k, qubit, &rho.dims);
        twirled += &rho.matrix.conjugate_by(&op);
    }
    let mut out = rho.matrix.scale(1.0 - p);
    out += &twirled.scale(p / 4.0);
    DensityMatrix::new(out, rho.dims.clone())
}

/// I ⊗ … ⊗ op ⊗ … ⊗ I with `op` acting on subsystem `k`.
pub fn embed_single(op: &CMatrix, k: usize, dims: &[usize]) -> CMatrix {
    dims.iter().enumerate().fold(CMatrix::identity(1), |acc, (i, &d)| {
        if i == k {
            acc.kron(op)
        } else {
            acc.kron(&CMatrix::identity(d))
        }
    })
}

/// Uhlmann fidelity F = (Tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QuantumError::Mat(MatError::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        ))));
    }
    Ok(fidelity_matrices(&rho.matrix, &sigma.matrix)?)
}

pub(crate) fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> std::result::Result<f64, MatError> {
    let s = matcore::psd_sqrt(rho)?;
    let inner = (&(&s * sigma) * &s).hermitian_part();
    let vals = matcore::herm_eigvals(&inner)?;
    let root: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// α maximising F(ρ, W_α) over the full positivity range [-1/3, 1], found by
/// golden-section search to 1e-6, together with the achieved fidelity.
pub fn best_fit_alpha(rho: &DensityMatrix) -> Result<(f64, f64)> {
    rho.require_two_qubits()?;
    // √F(ρ, W_α) is concave in α, so the objective is unimodal.
    let f = |a: f64| fidelity_matrices(&rho.matrix, &isotropic_matrix(a));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-1.0 / 3.0, 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > 1e-7 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let mut best = (0.5 * (lo + hi), f(0.5 * (lo + hi))?);
    for edge in [-1.0 / 3.0, 1.0] {
        let fe = f(edge)?;
        if fe > best.1 {
            best = (edge, fe);
        }
    }
    Ok(best)
}

/// V = ((|HH⟩ - |VV⟩)/√2)⟨H| - ((|HV⟩ + |VH⟩)/√2)⟨V|.
pub fn broadcast_isometry() -> Isometry {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = CMatrix::from_real(4, 2, &[s, 0.0, 0.0, -s, 0.0, -s, -s, 0.0]).expect("4x2");
    Isometry { matrix: m }
}

/// (I₂ ⊗ V)·ρ·(I₂ ⊗ V)†: sends the second qubit of ρ through the broadcast
/// isometry, producing a three-qubit state with dims (2, 2, 2).
pub fn apply_isometry_second(rho: &DensityMatrix, v: &Isometry) -> Result<DensityMatrix> {
    rho.require_two_qubits()?;
    Ok(DensityMatrix {
        matrix: isometry_second_matrix(&rho.matrix, v),
        dims: vec![2, 2, 2],
    })
}

pub(crate) fn isometry_second_matrix(rho: &CMatrix, v: &Isometry) -> CMatrix {
    let k = kron(&CMatrix::identity(2), &v.matrix);
    rho.conjugate_by(&k)
}

/// Born-rule behavior p(a,b,c|x,y,z) = Tr[(Π_{a|x} ⊗ Π_{b|y} ⊗ Π_{c|z}) ρ_ABC]
/// for ±1 observables, with outcome 0 ↔ eigenvalue +1.
pub fn born_behavior(rho_abc: &DensityMatrix, settings: &MeasurementSettings) -> Result<Behavior> {
    if rho_abc.dims != [2, 2, 2] {
        return Err(QuantumError::InvalidState(format!(
            "expected a three-qubit state, got dims {:?}",
            rho_abc.dims
        )));
    }
    settings.validate()?;
    Ok(born_behavior_matrix(&rho_abc.matrix, settings))
}

pub(crate) fn born_behavior_matrix(rho: &CMatrix, settings: &MeasurementSettings) -> Behavior {
    let pa: Vec<[CMatrix; 2]> = settings.alice.iter().map(Observable::projectors).collect();
    let pb: Vec<[CMatrix; 2]> = settings.bob.iter().map(Observable::projectors).collect();
    let pc: Vec<[CMatrix; 2]> = settings.charlie.iter().map(Observable::projectors).collect();
    Behavior::from_fn(|x, y, z, a, b, c| {
        let op = kron(&kron(&pa[x][a], &pb[y][b]), &pc[z][c]);
        op.trace_product(rho).re.max(0.0)
    })
}

/// Effective qubit POVM V†(Π_{b|y} ⊗ Π_{c|z})V with outcomes ordered
/// (b, c) = 00, 01, 10, 11.
pub fn effective_povm(v: &Isometry, b_y: &Observable, c_z: &Observable) -> Result<Povm> {
    b_y.require_dichotomic()?;
    c_z.require_dichotomic()?;
    let pb = b_y.projectors();
    let pc = c_z.projectors();
    let mut effects = Vec::with_capacity(4);
    let mut labels = Vec::with_capacity(4);
    for (b, pb) in pb.iter().enumerate() {
        for (c, pc) in pc.iter().enumerate() {
            effects.push(v.pull_back(&kron(pb, pc)));
            labels.push(format!("{b}{c}"));
        }
    }
    Povm::new(effects, labels)
}

/// The four effective POVMs for (y, z) = 00, 01, 10, 11.
pub fn effective_povms(v: &Isometry, settings: &MeasurementSettings) -> Result<Vec<Povm>> {
    let mut out = Vec::with_capacity(4);
    for b in &settings.bob {
        for c in &settings.charlie {
            out.push(effective_povm(v, b, c)?);
        }
    }
    Ok(out)
}

/// σ_{o|s} = Tr₂[(I ⊗ E_{o|s})·ρ] for every effect of every POVM acting on
/// the second qubit.
pub fn assemblage(rho: &DensityMatrix, povms: &[Povm]) -> Result<Assemblage> {
    rho.require_two_qubits()?;
    let mut sigma = Vec::with_capacity(povms.len());
    for povm in povms {
        if povm.dim() != 2 {
            return Err(QuantumError::InvalidPovm("assemblage needs qubit POVMs".into()));
        }
        let mut row = Vec::with_capacity(povm.len());
        for e in povm.effects() {
            let op = &kron(&CMatrix::identity(2), e) * rho.matrix();
            row.push(partial_trace(&op, &[2, 2], &[0])?.hermitian_part());
        }
        sigma.push(row);
    }
    Assemblage::new(sigma).map_err(|e| QuantumError::InvalidState(e.to_string()))
}

/// Haar-ish random pure state vector of dimension `d` (complex Gaussian,
/// normalised).
pub fn random_state_vector<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    use rand_distr::{Distribution, StandardNormal};
    let v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Random mixed state from the Ginibre ensemble with the given rank.
pub fn random_density_matrix<R: rand::Rng + ?Sized>(dims: Vec<usize>, rank: usize, rng: &mut R) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let g = random_ginibre(d, rank, rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix {
        matrix: m.scale(1.0 / tr).hermitian_part(),
        dims,
    }
}

pub(crate) fn random_ginibre<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    })
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(d, d, rng);
    // Modified Gram-Schmidt on the columns.
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|c| g.column(c)).collect();
    for k in 0..d {
        for j in 0..k {
            let proj: Complex64 = (0..d).map(|i| cols[j][i].conj() * cols[k][i]).sum();
            for i in 0..d {
                let sub = proj * cols[j][i];
                cols[k][i] -= sub;
            }
        }
        let n = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[k].iter_mut() {
            *z /= n;
        }
    }
    CMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Random qubit observable ±n·σ with a uniformly random unit Bloch vector.
pub fn random_dichotomic<R: rand::Rng + ?Sized>(rng: &mut R, label: &str) -> Observable {
    use rand_distr::{Distribution, StandardNormal};
    let mut n = [0.0f64; 3];
    for x in n.iter_mut() {
        *x = StandardNormal.sample(&mut *rng);
    }
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    for x in n.iter_mut() {
        *x /= norm;
    }
    Observable::bloch(n, label).expect("unit Bloch vector")
}

/// |0⟩ and |1⟩ basis vectors of a qubit.
pub fn ket(bit: usize) -> Vec<Complex64> {
    if bit == 0 {
        vec![ONE, ZERO]
    } else {
        vec![ZERO, ONE]
    }
}

/// Spectral decomposition exposed for callers that need the eigenvectors of a
/// state.
pub fn eig(rho: &DensityMatrix) -> (Vec<f64>, CMatrix) {
    herm_eig(&rho.matrix).expect("density matrices are Hermitian")
}
