//! Synthetic two-qubit Pauli tomography and maximum-likelihood reconstruction.
//!
//! Each of the nine local Pauli basis pairs (XX, XY, …, ZZ) is one setting
//! with four outcomes ordered 00, 01, 10, 11, where outcome 0 is the +1
//! eigenvector. That gives 36 projectors in total.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, QuantumError, Result};
use crate::matcore::{kron, pauli, CMatrix, RMatrix};

/// Stopping threshold on the per-count log-likelihood gain.
pub const MLE_GAIN_TOL: f64 = 1e-14;
pub const MLE_MAX_ITER: usize = 5000;
const MLE_DILUTION: f64 = 0.5;
/// Accepted steps double the dilution up to this cap; rejected ones halve it.
const MLE_MAX_DILUTION: f64 = 1e3;

/// One measurement setting: its label, the projectors assumed when
/// reconstructing, and the recorded counts per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct TomographySetting {
    pub label: String,
    pub projectors: Vec<CMatrix>,
    pub counts: Vec<f64>,
}

/// Counts for a full set of tomography settings. Counts are stored as reals so
/// that exact probabilities can be fed through the same reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub settings: Vec<TomographySetting>,
}

/// Compact serialisable form: labels and counts only, projectors implied by
/// the Pauli labels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecordCounts {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<f64>>,
}

impl MeasurementRecord {
    pub fn total_counts(&self) -> f64 {
        self.settings.iter().flat_map(|s| s.counts.iter()).sum()
    }

    pub fn num_projectors(&self) -> usize {
        self.settings.iter().map(|s| s.projectors.len()).sum()
    }

    /// Exact Born probabilities scaled by `shots`; no sampling.
    pub fn from_probabilities(rho: &DensityMatrix, shots: f64) -> Self {
        let settings = pauli_bases()
            .into_iter()
            .map(|b| {
                let counts = b
                    .projectors
                    .iter()
                    .map(|p| shots * rho.expectation(p).max(0.0))
                    .collect();
                TomographySetting {
                    label: b.label,
                    projectors: b.projectors,
                    counts,
                }
            })
            .collect();
        Self { settings }
    }

    pub fn counts(&self) -> RecordCounts {
        RecordCounts {
            labels: self.settings.iter().map(|s| s.label.clone()).collect(),
            counts: self.settings.iter().map(|s| s.counts.clone()).collect(),
        }
    }
}

/// A measurement basis: label plus its rank-one projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub label: String,
    pub projectors: Vec<CMatrix>,
}

/// Eigenprojectors (+1 first) of a single-qubit Pauli.
pub fn pauli_eigenprojectors(which: char) -> [CMatrix; 2] {
    let p = match which {
        'X' => pauli::x(),
        'Y' => pauli::y(),
        'Z' => pauli::z(),
        other => panic!("unknown Pauli label {other}"),
    };
    let id = pauli::id2();
    [(&id + &p).scale(0.5), (&id - &p).scale(0.5)]
}

/// The nine two-qubit Pauli product bases in the order XX, XY, XZ, YX, …, ZZ.
pub fn pauli_bases() -> Vec<Basis> {
    let labels = ['X', 'Y', 'Z'];
    let mut out = Vec::with_capacity(9);
    for &a in &labels {
        for &b in &labels {
            let pa = pauli_eigenprojectors(a);
            let pb = pauli_eigenprojectors(b);
            let projectors = pa.iter().flat_map(|x| pb.iter().map(move |y| kron(x, y))).collect();
            out.push(Basis {
                label: format!("{a}{b}"),
                projectors,
            });
        }
    }
    out
}

/// Simulates the ideal 36-projector tomography of `rho` with a seeded RNG.
pub fn simulate_tomography(rho: &DensityMatrix, shots_per_basis: u64, rng_seed: u64) -> MeasurementRecord {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(rng_seed);
    let bases = pauli_bases();
    simulate_with_bases(rho, &bases, &bases, shots_per_basis, &mut rng)
}

/// Draws multinomial counts from the `actual` measurement operators while
/// recording the `nominal` ones, which is what a reconstruction would assume.
pub fn simulate_with_bases<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    nominal: &[Basis],
    actual: &[Basis],
    shots_per_basis: u64,
    rng: &mut R,
) -> MeasurementRecord {
    assert_eq!(nominal.len(), actual.len(), "basis lists must align");
    let settings = nominal
        .iter()
        .zip(actual)
        .map(|(nom, act)| {
            let probs: Vec<f64> = act.projectors.iter().map(|p| rho.expectation(p).max(0.0)).collect();
            let counts = sample_multinomial(shots_per_basis, &probs, rng)
                .into_iter()
                .map(|c| c as f64)
                .collect();
            TomographySetting {
                label: nom.label.clone(),
                projectors: nom.projectors.clone(),
                counts,
            }
        })
        .collect();
    MeasurementRecord { settings }
}

/// Multinomial draw by sequential conditional binomials. Probabilities are
/// renormalised, so small deviations from unit sum are tolerated.
pub fn sample_multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let total: f64 = probs.iter().sum();
    let mut out = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass = total;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q).expect("probability in [0,1]").sample(rng);
        out[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    out
}

/// Rank of the real span of the recorded projectors.
pub fn projector_span_rank(record: &MeasurementRecord) -> usize {
    let ops: Vec<&CMatrix> = record.settings.iter().flat_map(|s| s.projectors.iter()).collect();
    let n = ops.len();
    let gram = RMatrix::from_fn(n, n, |i, j| ops[i].trace_product(ops[j]).re);
    let vals = gram.sym_eigvals();
    let top = vals.iter().cloned().fold(0.0, f64::max);
    vals.iter().filter(|&&v| v > 1e-10 * top.max(1.0)).count()
}

/// Log-likelihood Σ n_k log p_k divided by the total count.
pub fn log_likelihood(record: &MeasurementRecord, rho: &CMatrix) -> f64 {
    let total = record.total_counts();
    let mut ll = 0.0;
    for s in &record.settings {
        for (p, &n) in s.projectors.iter().zip(&s.counts) {
            if n > 0.0 {
                ll += n * p.trace_product(rho).re.max(1e-300).ln();
            }
        }
    }
    ll / total
}

/// Outcome of a maximum-likelihood reconstruction.
#[derive(Clone, Debug)]
pub struct MleResult {
    pub state: DensityMatrix,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Per-count log-likelihood after every accepted step, starting from the
    /// maximally mixed initial guess.
    pub history: Vec<f64>,
}

/// Diluted RρR maximum-likelihood reconstruction.
pub fn mle_reconstruct(record: &MeasurementRecord) -> Result<DensityMatrix> {
    mle_reconstruct_detailed(record).map(|r| r.state)
}

pub fn mle_reconstruct_detailed(record: &MeasurementRecord) -> Result<MleResult> {
    let d = record
        .settings
        .first()
        .and_then(|s| s.projectors.first())
        .map(|p| p.rows())
        .ok_or(QuantumError::InformationallyIncomplete { rank: 0, needed: 16 })?;
    let needed = d * d;
    let rank = projector_span_rank(record);
    if rank < needed {
        return Err(QuantumError::InformationallyIncomplete { rank, needed });
    }
    let total = record.total_counts();
    if total <= 0.0 {
        return Err(QuantumError::InvalidState("measurement record has no counts".into()));
    }
    let id = CMatrix::identity(d);
    let mut rho = id.scale(1.0 / d as f64);
    let mut ll = log_likelihood(record, &rho);
    let mut history = vec![ll];
    let mut eps = MLE_DILUTION;
    let mut iterations = 0;
    while iterations < MLE_MAX_ITER {
        iterations += 1;
        let r = r_operator(record, &rho, total);
        let step = {
            let mut g = id.clone();
            g += &r.scale(eps);
            g.scale(1.0 / (1.0 + eps))
        };
        let next = (&(&step * &rho) * &step).hermitian_part();
        let next = next.scale(1.0 / next.trace().re);
        let next_ll = log_likelihood(record, &next);
        if next_ll < ll {
            eps *= 0.5;
            if eps < 1e-12 {
                break;
            }
            continue;
        }
        let gain = next_ll - ll;
        rho = next;
        ll = next_ll;
        history.push(ll);
        eps = (eps * 2.0).min(MLE_MAX_DILUTION);
        if gain < MLE_GAIN_TOL {
            break;
        }
    }
    let state = DensityMatrix::new(rho, vec![2; d.trailing_zeros() as usize])?;
    Ok(MleResult {
        state,
        iterations,
        log_likelihood: ll,
        history,
    })
}

fn r_operator(record: &MeasurementRecord, rho: &CMatrix, total: f64) -> CMatrix {
    let d = rho.rows();
    let mut r = CMatrix::zeros(d, d);
    for s in &record.settings {
        for (p, &n) in s.projectors.iter().zip(&s.counts) {
            if n > 0.0 {
                let prob = p.trace_product(rho).re.max(1e-300);
                r += &p.scale(n / (prob * total));
            }
        }
    }
    r
}
