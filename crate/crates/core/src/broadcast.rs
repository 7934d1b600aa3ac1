//! Tripartite behaviors in the broadcast scenario: correlators, the
//! ten-term broadcast inequality, no-signalling residuals between the two
//! broadcast parties, and count-based estimation.
//!
//! Settings: x ∈ {0,1,2} for Alice, y, z ∈ {0,1} for Bob and Charlie. Outcome
//! bit 0 corresponds to eigenvalue +1.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::{pauli, CMatrix};
use crate::quantum::{
    self, broadcast_isometry, isometry_second_matrix, isotropic_matrix, tomography::sample_multinomial, DensityMatrix,
    Isometry, Observable, QuantumError,
};

pub const NX: usize = 3;
pub const NY: usize = 2;
pub const NZ: usize = 2;
const OUTCOMES: usize = 8;
const CELLS: usize = NX * NY * NZ * OUTCOMES;

/// Local bound of the ten-term correlator sum.
pub const LOCAL_BOUND: f64 = 4.0;

/// Tolerance on z-independence of Alice-Bob marginals for exact behaviors.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BroadcastError {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("Alice-Bob marginal for (x={x}, y={y}) depends on z by {deviation:.3e}")]
    Signalling { x: usize, y: usize, deviation: f64 },
    #[error("no counts for setting (x={x}, y={y}, z={z})")]
    EmptySetting { x: usize, y: usize, z: usize },
    #[error("invalid behavior: {0}")]
    Invalid(String),
    #[error("counts file: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T> = std::result::Result<T, BroadcastError>;

fn cell(x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> usize {
    ((((x * NY + y) * NZ + z) * 2 + a) * 2 + b) * 2 + c
}

fn setting_offset(x: usize, y: usize, z: usize) -> usize {
    cell(x, y, z, 0, 0, 0)
}

fn check_xyz(x: usize, y: usize, z: usize) -> Result<()> {
    if x >= NX || y >= NY || z >= NZ {
        return Err(BroadcastError::IndexOutOfRange(format!("(x={x}, y={y}, z={z})")));
    }
    Ok(())
}

/// Raw coincidence counts indexed by (x, y, z, a, b, c).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    data: Vec<u64>,
}

impl Default for Counts {
    fn default() -> Self {
        Self { data: vec![0; CELLS] }
    }
}

impl Counts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize, usize, usize) -> u64) -> Self {
        let mut out = Self::new();
        for_each_cell(|x, y, z, a, b, c| out.data[cell(x, y, z, a, b, c)] = f(x, y, z, a, b, c));
        out
    }

    pub fn get(&self, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> u64 {
        self.data[cell(x, y, z, a, b, c)]
    }

    #[allow(clippy::too_many_arguments)]
    pub fn set(&mut self, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize, n: u64) {
        self.data[cell(x, y, z, a, b, c)] = n;
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add(&mut self, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize, n: u64) {
        self.data[cell(x, y, z, a, b, c)] += n;
    }

    pub fn setting_total(&self, x: usize, y: usize, z: usize) -> u64 {
        let o = setting_offset(x, y, z);
        self.data[o..o + OUTCOMES].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    /// Reads a CSV with header `x,y,z,a,b,c,count`. Repeated rows accumulate.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            x: usize,
            y: usize,
            z: usize,
            a: usize,
            b: usize,
            c: usize,
            count: u64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["x", "y", "z", "a", "b", "c", "count"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(BroadcastError::Invalid(format!(
                "counts header must be {}, got {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut out = Self::new();
        for row in rdr.deserialize() {
            let r: Row = row?;
            check_xyz(r.x, r.y, r.z)?;
            if r.a > 1 || r.b > 1 || r.c > 1 {
                return Err(BroadcastError::IndexOutOfRange(format!(
                    "outcome ({}, {}, {})",
                    r.a, r.b, r.c
                )));
            }
            out.add(r.x, r.y, r.z, r.a, r.b, r.c, r.count);
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "z", "a", "b", "c", "count"])?;
        let mut err = None;
        for_each_cell(|x, y, z, a, b, c| {
            if err.is_none() {
                let n = self.get(x, y, z, a, b, c);
                let rec = [x, y, z, a, b, c].map(|v| v.to_string());
                if let Err(e) = w.write_record(rec.iter().map(String::as_str).chain([n.to_string().as_str()])) {
                    err = Some(e);
                }
            }
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn for_each_cell(mut f: impl FnMut(usize, usize, usize, usize, usize, usize)) {
    for x in 0..NX {
        for y in 0..NY {
            for z in 0..NZ {
                for a in 0..2 {
                    for b in 0..2 {
                        for c in 0..2 {
                            f(x, y, z, a, b, c);
                        }
                    }
                }
            }
        }
    }
}

/// Conditional probability table p(a,b,c|x,y,z).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviorJson", into = "BehaviorJson")]
pub struct Behavior {
    p: Vec<f64>,
    counts: Option<Counts>,
    std_errors: Option<Vec<f64>>,
}

impl Behavior {
    /// Validates nonnegativity and per-setting normalisation (1e-9).
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() != CELLS {
            return Err(BroadcastError::Invalid(format!(
                "expected {CELLS} probabilities, got {}",
                p.len()
            )));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(BroadcastError::Invalid(format!("entry {v} is not a probability")));
        }
        for x in 0..NX {
            for y in 0..NY {
                for z in 0..NZ {
                    let o = setting_offset(x, y, z);
                    let s: f64 = p[o..o + OUTCOMES].iter().sum();
                    if (s - 1.0).abs() > 1e-9 {
                        return Err(BroadcastError::Invalid(format!(
                            "distribution for (x={x}, y={y}, z={z}) sums to {s}"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            p,
            counts: None,
            std_errors: None,
        })
    }

    /// Builds a table from a closure; callers are trusted to supply a valid
    /// behavior (used for Born-rule evaluation).
    pub(crate) fn from_fn(mut f: impl FnMut(usize, usize, usize, usize, usize, usize) -> f64) -> Self {
        let mut p = vec![0.0; CELLS];
        for_each_cell(|x, y, z, a, b, c| p[cell(x, y, z, a, b, c)] = f(x, y, z, a, b, c));
        Self {
            p,
            counts: None,
            std_errors: None,
        }
    }

    pub fn try_from_fn(f: impl FnMut(usize, usize, usize, usize, usize, usize) -> f64) -> Result<Self> {
        Self::new(Self::from_fn(f).p)
    }

    pub fn uniform() -> Self {
        Self::from_fn(|_, _, _, _, _, _| 1.0 / OUTCOMES as f64)
    }

    pub fn p(&self, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> f64 {
        self.p[cell(x, y, z, a, b, c)]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn counts(&self) -> Option<&Counts> {
        self.counts.as_ref()
    }

    pub fn is_count_derived(&self) -> bool {
        self.counts.is_some()
    }

    /// Poissonian standard error of p(a,b,c|x,y,z), if count-derived.
    pub fn std_error(&self, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> Option<f64> {
        self.std_errors.as_ref().map(|e| e[cell(x, y, z, a, b, c)])
    }

    /// Number of samples behind setting (x, y, z), if count-derived.
    pub fn setting_total(&self, x: usize, y: usize, z: usize) -> Option<u64> {
        self.counts.as_ref().map(|c| c.setting_total(x, y, z))
    }

    /// Mixture w·self + (1-w)·other of the probability tables.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        Self::from_fn(|x, y, z, a, b, c| w * self.p(x, y, z, a, b, c) + (1.0 - w) * other.p(x, y, z, a, b, c))
    }

    /// Same behavior with Alice's outcome bit flipped.
    pub fn relabel_alice(&self) -> Self {
        Self::from_fn(|x, y, z, a, b, c| self.p(x, y, z, 1 - a, b, c))
    }

    /// p_BC(b,c|y,z), averaged over Alice's input.
    pub fn bc_marginal(&self, y: usize, z: usize, b: usize, c: usize) -> f64 {
        (0..NX)
            .map(|x| (0..2).map(|a| self.p(x, y, z, a, b, c)).sum::<f64>())
            .sum::<f64>()
            / NX as f64
    }

    /// p_AB(a,b|x,y) at a fixed z.
    pub fn ab_marginal(&self, x: usize, y: usize, z: usize, a: usize, b: usize) -> f64 {
        (0..2).map(|c| self.p(x, y, z, a, b, c)).sum()
    }

    /// Draws `per_setting` multinomial samples for every (x, y, z).
    pub fn sample_counts<R: Rng + ?Sized>(&self, per_setting: u64, rng: &mut R) -> Counts {
        let mut counts = Counts::new();
        for x in 0..NX {
            for y in 0..NY {
                for z in 0..NZ {
                    let o = setting_offset(x, y, z);
                    let draw = sample_multinomial(per_setting, &self.p[o..o + OUTCOMES], rng);
                    counts.data[o..o + OUTCOMES].copy_from_slice(&draw);
                }
            }
        }
        counts
    }
}

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    shape: Vec<usize>,
    index_order: String,
    probabilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    std_errors: Option<Vec<f64>>,
}

impl TryFrom<BehaviorJson> for Behavior {
    type Error = BroadcastError;

    fn try_from(j: BehaviorJson) -> Result<Self> {
        if j.shape != [NX, NY, NZ, 2, 2, 2] {
            return Err(BroadcastError::Invalid(format!("unsupported shape {:?}", j.shape)));
        }
        let mut b = Behavior::new(j.probabilities)?;
        if let Some(c) = j.counts {
            if c.len() != CELLS {
                return Err(BroadcastError::Invalid("counts array has the wrong length".into()));
            }
            b.counts = Some(Counts { data: c });
        }
        if let Some(e) = j.std_errors {
            if e.len() != CELLS {
                return Err(BroadcastError::Invalid("std_errors array has the wrong length".into()));
            }
            b.std_errors = Some(e);
        }
        Ok(b)
    }
}

impl From<Behavior> for BehaviorJson {
    fn from(b: Behavior) -> Self {
        Self {
            shape: vec![NX, NY, NZ, 2, 2, 2],
            index_order: "x,y,z,a,b,c".into(),
            probabilities: b.p,
            counts: b.counts.map(|c| c.data),
            std_errors: b.std_errors,
        }
    }
}

/// Observables for Alice (3), Bob (2) and Charlie (2).
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSettings {
    pub alice: Vec<Observable>,
    pub bob: Vec<Observable>,
    pub charlie: Vec<Observable>,
}

impl MeasurementSettings {
    pub fn validate(&self) -> quantum::Result<()> {
        if self.alice.len() != NX || self.bob.len() != NY || self.charlie.len() != NZ {
            return Err(QuantumError::OutOfRange(format!(
                "expected 3/2/2 observables, got {}/{}/{}",
                self.alice.len(),
                self.bob.len(),
                self.charlie.len()
            )));
        }
        for o in self.alice.iter().chain(&self.bob).chain(&self.charlie) {
            if o.matrix().rows() != 2 {
                return Err(QuantumError::InvalidObservable {
                    label: o.label().into(),
                    reason: "not a qubit observable".into(),
                });
            }
            o.require_dichotomic()?;
        }
        Ok(())
    }
}

/// The activation settings: A₀ = -(X+Z)/√2, A₁ = (X-Z)/√2, A₂ = -Y,
/// B_{0,1} = (√2 X ± Y)/√3, C₀ = Z, C₁ = X.
pub fn activation_settings() -> MeasurementSettings {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    let r23 = (2.0f64 / 3.0).sqrt();
    let ob = |n: [f64; 3], l: &str| Observable::bloch(n, l).expect("unit Bloch vector");
    MeasurementSettings {
        alice: vec![
            ob([-s2, 0.0, -s2], "A0"),
            ob([s2, 0.0, -s2], "A1"),
            ob([0.0, -1.0, 0.0], "A2"),
        ],
        bob: vec![ob([r23, s3, 0.0], "B0"), ob([r23, -s3, 0.0], "B1")],
        charlie: vec![ob([0.0, 0.0, 1.0], "C0"), ob([1.0, 0.0, 0.0], "C1")],
    }
}

/// ⟨A_x B_y C_z⟩ = Σ (-1)^{a+b+c} p(a,b,c|x,y,z).
pub fn correlator(behavior: &Behavior, x: usize, y: usize, z: usize) -> Result<f64> {
    check_xyz(x, y, z)?;
    let o = setting_offset(x, y, z);
    Ok(behavior.p[o..o + OUTCOMES]
        .iter()
        .enumerate()
        .map(|(k, p)| if k.count_ones() % 2 == 0 { *p } else { -*p })
        .sum())
}

/// ⟨A_x B_y⟩ evaluated on the z = 0 and z = 1 slices separately.
pub fn two_party_slices(behavior: &Behavior, x: usize, y: usize) -> Result<[f64; 2]> {
    check_xyz(x, y, 0)?;
    let e = |z| {
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * behavior.ab_marginal(x, y, z, a, b);
            }
        }
        s
    };
    Ok([e(0), e(1)])
}

/// ⟨A_x B_y⟩ from the z = 0 slice. For exact (not count-derived) behaviors
/// the Alice-Bob marginal must not depend on z.
pub fn two_party_correlator(behavior: &Behavior, x: usize, y: usize) -> Result<f64> {
    check_xyz(x, y, 0)?;
    if !behavior.is_count_derived() {
        let mut deviation: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                deviation =
                    deviation.max((behavior.ab_marginal(x, y, 0, a, b) - behavior.ab_marginal(x, y, 1, a, b)).abs());
            }
        }
        if deviation > MARGINAL_TOL {
            return Err(BroadcastError::Signalling { x, y, deviation });
        }
    }
    Ok(two_party_slices(behavior, x, y)?[0])
}

/// One signed term of the inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorTerm {
    pub label: String,
    pub coefficient: f64,
    pub value: f64,
    /// For two-party terms: the value on the z = 1 slice, kept for reference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_slice_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityResult {
    /// Ten-term signed correlator sum, local bound 4.
    #[serde(rename = "S")]
    pub s: f64,
    /// S − 4, local bound 0.
    #[serde(rename = "I_B")]
    pub i_b: f64,
    pub terms: Vec<CorrelatorTerm>,
    /// Propagated standard error of S for count-derived behaviors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_std_error: Option<f64>,
}

impl InequalityResult {
    pub fn violates(&self) -> bool {
        self.i_b > 0.0
    }
}

/// Three-party terms (coefficient, x, y, z).
const TRIPLE_TERMS: [(f64, usize, usize, usize); 8] = [
    (1.0, 0, 0, 0),
    (1.0, 0, 1, 1),
    (1.0, 1, 1, 1),
    (-1.0, 1, 0, 0),
    (1.0, 0, 0, 1),
    (1.0, 0, 1, 0),
    (1.0, 1, 0, 1),
    (-1.0, 1, 1, 0),
];

/// Two-party terms (coefficient, x, y).
const PAIR_TERMS: [(f64, usize, usize); 2] = [(-2.0, 2, 0), (2.0, 2, 1)];

/// Evaluates the ten-term broadcast inequality. Two-party terms use the z = 0
/// slice; the z = 1 value is reported alongside.
pub fn broadcast_value(behavior: &Behavior) -> InequalityResult {
    let mut terms = Vec::with_capacity(10);
    let mut s = 0.0;
    let mut var = 0.0;
    let n_of = |x, y, z| behavior.setting_total(x, y, z).map(|n| n.max(1) as f64);
    for &(coef, x, y, z) in &TRIPLE_TERMS {
        let v = correlator(behavior, x, y, z).expect("indices in range");
        s += coef * v;
        if let Some(n) = n_of(x, y, z) {
            var += coef * coef * (1.0 - v * v).max(0.0) / n;
        }
        terms.push(CorrelatorTerm {
            label: format!("A{x}B{y}C{z}"),
            coefficient: coef,
            value: v,
            alt_slice_value: None,
        });
    }
    for &(coef, x, y) in &PAIR_TERMS {
        let [v0, v1] = two_party_slices(behavior, x, y).expect("indices in range");
        s += coef * v0;
        if let Some(n) = n_of(x, y, 0) {
            var += coef * coef * (1.0 - v0 * v0).max(0.0) / n;
        }
        terms.push(CorrelatorTerm {
            label: format!("A{x}B{y}"),
            coefficient: coef,
            value: v0,
            alt_slice_value: Some(v1),
        });
    }
    InequalityResult {
        s,
        i_b: s - LOCAL_BOUND,
        terms,
        s_std_error: behavior.is_count_derived().then(|| var.sqrt()),
    }
}

/// Dephases the control qubit (Bob's input) in the computational basis before
/// the isometry, which removes the coherence between the two branch
/// subspaces V|0⟩ and V|1⟩.
fn dephase_second(rho_ab: &CMatrix) -> CMatrix {
    let z2 = crate::matcore::kron(&pauli::id2(), &pauli::z());
    let mut out = rho_ab.clone();
    out += &rho_ab.conjugate_by(&z2);
    out.scale(0.5)
}

/// ρ_ABC(v) = v·(I⊗V)ρ(I⊗V)† + (1-v)·(I⊗V)Δ(ρ)(I⊗V)†, where Δ dephases
/// the broadcast qubit. v = 1 is the ideal channel.
pub fn degraded_broadcast_state(rho_ab: &DensityMatrix, v: &Isometry, visibility: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(BroadcastError::IndexOutOfRange(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    if rho_ab.dims() != [2, 2] {
        return Err(BroadcastError::Invalid(
            "degraded channel needs a two-qubit input".into(),
        ));
    }
    let m = degraded_matrix(rho_ab.matrix(), v, visibility);
    Ok(DensityMatrix::new(m, vec![2, 2, 2])?)
}

fn degraded_matrix(rho_ab: &CMatrix, v: &Isometry, visibility: f64) -> CMatrix {
    let mut mixed = rho_ab.scale(visibility);
    mixed += &dephase_second(rho_ab).scale(1.0 - visibility);
    isometry_second_matrix(&mixed, v)
}

/// Behavior of a two-qubit state sent through the visibility-degraded
/// broadcast channel and measured with `settings`.
pub fn channel_behavior(rho_ab: &DensityMatrix, settings: &MeasurementSettings, visibility: f64) -> Result<Behavior> {
    let v = broadcast_isometry();
    let rho_abc = degraded_broadcast_state(rho_ab, &v, visibility)?;
    Ok(quantum::born_behavior(&rho_abc, settings)?)
}

/// S for W_α through the broadcast channel with the given interference
/// visibility and the activation settings. Equals 4√3·α at v = 1.
pub fn ideal_curve(alpha: f64, visibility: f64) -> Result<f64> {
    if !(-1.0 / 3.0..=1.0).contains(&alpha) {
        return Err(BroadcastError::IndexOutOfRange(format!(
            "alpha {alpha} outside [-1/3, 1]"
        )));
    }
    if !(0.0..=1.0).contains(&visibility) {
        return Err(BroadcastError::IndexOutOfRange(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    let v = broadcast_isometry();
    let rho = degraded_matrix(&isotropic_matrix(alpha), &v, visibility);
    let behavior = quantum::born_behavior_matrix(&rho, &activation_settings());
    Ok(broadcast_value(&behavior).s)
}

/// Residual |Σ_b p_BC(b,c|y,z) − Σ_b p_BC(b,c|y',z)|: Bob's input leaking
/// into Charlie's marginal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BobResidual {
    pub y: usize,
    pub y_prime: usize,
    pub z: usize,
    pub c: usize,
    pub value: f64,
}

/// Residual |Σ_c p_BC(b,c|y,z) − Σ_c p_BC(b,c|y,z')|: Charlie's input
/// leaking into Bob's marginal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharlieResidual {
    pub y: usize,
    pub z: usize,
    pub z_prime: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsResiduals {
    pub bob: Vec<BobResidual>,
    pub charlie: Vec<CharlieResidual>,
    pub mean: f64,
    pub max: f64,
}

/// No-signalling residuals between the broadcast parties, for every
/// unordered pair of distinct inputs. p_BC is averaged over Alice's input.
pub fn no_signalling_residuals(behavior: &Behavior) -> NsResiduals {
    let mut bob = Vec::new();
    let mut charlie = Vec::new();
    let c_marg = |y, z, c| (0..2).map(|b| behavior.bc_marginal(y, z, b, c)).sum::<f64>();
    let b_marg = |y, z, b| (0..2).map(|c| behavior.bc_marginal(y, z, b, c)).sum::<f64>();
    for y in 0..NY {
        for y_prime in y + 1..NY {
            for z in 0..NZ {
                for c in 0..2 {
                    bob.push(BobResidual {
                        y,
                        y_prime,
                        z,
                        c,
                        value: (c_marg(y, z, c) - c_marg(y_prime, z, c)).abs(),
                    });
                }
            }
        }
    }
    for y in 0..NY {
        for z in 0..NZ {
            for z_prime in z + 1..NZ {
                for b in 0..2 {
                    charlie.push(CharlieResidual {
                        y,
                        z,
                        z_prime,
                        b,
                        value: (b_marg(y, z, b) - b_marg(y, z_prime, b)).abs(),
                    });
                }
            }
        }
    }
    let all: Vec<f64> = bob
        .iter()
        .map(|r| r.value)
        .chain(charlie.iter().map(|r| r.value))
        .collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let max = all.iter().cloned().fold(0.0, f64::max);
    NsResiduals {
        bob,
        charlie,
        mean,
        max,
    }
}

/// Normalises counts per setting and attaches standard errors
/// √(p(1−p)/N).
pub fn behavior_from_counts(counts: &Counts) -> Result<Behavior> {
    let mut p = vec![0.0; CELLS];
    let mut err = vec![0.0; CELLS];
    for x in 0..NX {
        for y in 0..NY {
            for z in 0..NZ {
                let n = counts.setting_total(x, y, z);
                if n == 0 {
                    return Err(BroadcastError::EmptySetting { x, y, z });
                }
                let o = setting_offset(x, y, z);
                for k in 0..OUTCOMES {
                    let pk = counts.data[o + k] as f64 / n as f64;
                    p[o + k] = pk;
                    err[o + k] = (pk * (1.0 - pk) / n as f64).sqrt();
                }
            }
        }
    }
    let mut b = Behavior::new(p)?;
    b.counts = Some(counts.clone());
    b.std_errors = Some(err);
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{apply_isometry_second, born_behavior, isotropic_state, random_density_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ideal(alpha: f64) -> Behavior {
        let rho = apply_isometry_second(&isotropic_state(alpha).unwrap(), &broadcast_isometry()).unwrap();
        born_behavior(&rho, &activation_settings()).unwrap()
    }

    /// Pauli-expansion oracle: ⟨P⊗Q⊗R⟩ for the ideal α = 1 three-qubit state,
    /// with observables expanded in the Pauli basis.
    fn pauli_oracle_correlator(x: usize, y: usize, z: usize) -> f64 {
        let st = activation_settings();
        let psi = {
            let mut v = vec![crate::matcore::ZERO; 8];
            v[0] = 0.5.into();
            v[3] = (-0.5).into();
            v[5] = (-0.5).into();
            v[6] = (-0.5).into();
            v
        };
        let rho = CMatrix::projector(&psi);
        let paulis = [pauli::x(), pauli::y(), pauli::z()];
        let coeffs = |o: &Observable| -> [f64; 3] { [0, 1, 2].map(|k| o.matrix().trace_product(&paulis[k]).re / 2.0) };
        let (ca, cb, cc) = (coeffs(&st.alice[x]), coeffs(&st.bob[y]), coeffs(&st.charlie[z]));
        let mut total = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let w = ca[i] * cb[j] * cc[k];
                    if w != 0.0 {
                        let op = crate::matcore::kron_all(&[&paulis[i], &paulis[j], &paulis[k]]);
                        total += w * op.trace_product(&rho).re;
                    }
                }
            }
        }
        total
    }

    #[test]
    fn correlator_examples() {
        let u = Behavior::uniform();
        for x in 0..3 {
            assert_eq!(correlator(&u, x, 1, 0).unwrap(), 0.0);
        }
        let det = Behavior::try_from_fn(|_, _, _, a, b, c| if a + b + c == 0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(correlator(&det, 1, 1, 1).unwrap(), 1.0);
        let b1 = ideal(1.0);
        assert!((correlator(&b1, 0, 0, 0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(correlator(&b1, 3, 0, 0).is_err());
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    let direct = correlator(&b1, x, y, z).unwrap();
                    assert!((direct - pauli_oracle_correlator(x, y, z)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn two_party_examples() {
        let b1 = ideal(1.0);
        let s3 = 1.0 / 3f64.sqrt();
        assert!((two_party_correlator(&b1, 2, 0).unwrap() + s3).abs() < 1e-14);
        assert!((two_party_correlator(&b1, 2, 1).unwrap() - s3).abs() < 1e-14);
        assert_eq!(two_party_correlator(&Behavior::uniform(), 0, 0).unwrap(), 0.0);
        // Bob's marginal depends on z: rejected for exact behaviors.
        let sig = Behavior::try_from_fn(|_, _, z, _, b, _| {
            let pb = if z == 0 { [0.6, 0.4][b] } else { [0.5, 0.5][b] };
            pb / 4.0
        })
        .unwrap();
        assert!(matches!(
            two_party_correlator(&sig, 0, 0),
            Err(BroadcastError::Signalling { .. })
        ));
    }

    #[test]
    fn broadcast_value_examples() {
        let r = broadcast_value(&ideal(1.0));
        assert!((r.s - 4.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((r.i_b - (4.0 * 3f64.sqrt() - 4.0)).abs() < 1e-12);
        assert_eq!(r.terms.len(), 10);
        let r0 = broadcast_value(&ideal(0.0));
        assert!(r0.s.abs() < 1e-14 && (r0.i_b + 4.0).abs() < 1e-14);
        assert_eq!(r0.i_b, r0.s - 4.0);
    }

    #[test]
    fn ideal_curve_examples() {
        assert!((ideal_curve(1.0, 1.0).unwrap() - 4.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((ideal_curve(1.0 / 3f64.sqrt(), 1.0).unwrap() - 4.0).abs() < 1e-12);
        for v in [0.0, 0.5, 1.0] {
            assert!(ideal_curve(0.0, v).unwrap().abs() < 1e-14);
        }
        let mut last = -1.0;
        for i in 0..=20 {
            let s = ideal_curve(0.8, i as f64 / 20.0).unwrap();
            assert!(s >= last - 1e-12);
            last = s;
        }
        assert!(ideal_curve(0.5, 1.2).is_err());
    }

    #[test]
    fn no_signalling_examples() {
        let r = no_signalling_residuals(&ideal(0.7));
        assert_eq!(r.bob.len(), 4);
        assert_eq!(r.charlie.len(), 4);
        assert!(r.max < 1e-12);
        // Bob's marginal shifts by 0.1 with z.
        let sig = Behavior::try_from_fn(|_, _, z, _, b, _| {
            let pb = if z == 0 { [0.6, 0.4][b] } else { [0.5, 0.5][b] };
            pb / 4.0
        })
        .unwrap();
        let r = no_signalling_residuals(&sig);
        assert!((r.max - 0.1).abs() < 1e-12);
        assert!(r.bob.iter().all(|e| e.value < 1e-15));
    }

    #[test]
    fn counts_examples() {
        let eq = Counts::from_fn(|_, _, _, _, _, _| 5);
        let b = behavior_from_counts(&eq).unwrap();
        assert!(b.probabilities().iter().all(|&p| p == 0.125));

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let counts = ideal(1.0).sample_counts(1_000_000, &mut rng);
        let r = broadcast_value(&behavior_from_counts(&counts).unwrap());
        let sigma = r.s_std_error.unwrap();
        assert!((r.s - 4.0 * 3f64.sqrt()).abs() < 3.0 * sigma, "{} ± {sigma}", r.s);

        let single = Counts::from_fn(|_, _, _, a, b, c| u64::from(a + b + c == 0));
        let b = behavior_from_counts(&single).unwrap();
        assert_eq!(b.p(0, 0, 0, 0, 0, 0), 1.0);
        assert_eq!(b.std_error(0, 0, 0, 0, 0, 0), Some(0.0));
        let mut empty = eq.clone();
        for a in 0..2 {
            for bb in 0..2 {
                for c in 0..2 {
                    empty.set(2, 1, 0, a, bb, c, 0);
                }
            }
        }
        assert!(matches!(
            behavior_from_counts(&empty),
            Err(BroadcastError::EmptySetting { x: 2, y: 1, z: 0 })
        ));
    }

    #[test]
    fn half_counts_have_large_errors() {
        let half = Counts::from_fn(|_, _, _, a, _, _| u64::from(a == 0));
        let b = behavior_from_counts(&half).unwrap();
        // Two outcomes with one count each per setting.
        assert_eq!(b.setting_total(0, 0, 0), Some(4));
        assert!(b.std_error(0, 0, 0, 0, 0, 0).unwrap() > 0.2);
    }

    #[test]
    fn csv_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let counts = ideal(0.6).sample_counts(100, &mut rng);
        let mut buf = Vec::new();
        counts.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,z,a,b,c,count\n"));
        assert_eq!(Counts::read_csv(buf.as_slice()).unwrap(), counts);
        assert!(Counts::read_csv("x,y,count\n0,0,1\n".as_bytes()).is_err());
        assert!(Counts::read_csv("x,y,z,a,b,c,count\n3,0,0,0,0,0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let b = ideal(0.5);
        let s = serde_json::to_string(&b).unwrap();
        let back: Behavior = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cb = behavior_from_counts(&b.sample_counts(50, &mut rng)).unwrap();
        let back: Behavior = serde_json::from_str(&serde_json::to_string(&cb).unwrap()).unwrap();
        assert_eq!(back, cb);
    }

    #[test]
    fn random_states_do_not_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let rho = random_density_matrix(vec![2, 2, 2], 8, &mut rng);
            let b = born_behavior(&rho, &activation_settings()).unwrap();
            assert!(no_signalling_residuals(&b).max < 1e-12);
        }
    }
}
