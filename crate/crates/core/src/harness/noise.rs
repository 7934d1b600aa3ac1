//! Measurement systematics for polarisation tomography.
//!
//! Each qubit is analysed by a quarter-wave plate, a half-wave plate and a
//! polarising beam splitter. The two output ports realise the two projectors
//! of one Pauli basis. Plate angles carry a calibration offset (drawn once
//! per simulated experiment), a repeatability jitter (drawn per basis
//! setting), and each plate has a retardance error (drawn once).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::matcore::{kron, CMatrix};
use crate::quantum::tomography::{pauli_bases, Basis};

use super::{HarnessError, Result};

/// Noise configuration for the Monte Carlo pipeline. Angles in degrees,
/// retardance in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub shots_per_basis: u64,
    pub waveplate_angle_sigma: f64,
    pub waveplate_retardance_sigma: f64,
    pub repeatability_sigma: f64,
    pub hom_visibility: f64,
    pub hom_visibility_sigma: f64,
    /// Poisson counts when set; exact expected counts otherwise.
    pub statistical_noise: bool,
    /// Samples per (x, y, z) setting for the broadcast test.
    pub broadcast_counts_per_setting: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            shots_per_basis: 10_000,
            waveplate_angle_sigma: 0.1,
            waveplate_retardance_sigma: 0.005,
            repeatability_sigma: 0.05,
            hom_visibility: 0.97,
            hom_visibility_sigma: 0.03,
            statistical_noise: true,
            broadcast_counts_per_setting: 1000,
        }
    }
}

impl NoiseModel {
    /// No systematics, exact counts, perfect interference.
    pub fn noiseless() -> Self {
        Self {
            waveplate_angle_sigma: 0.0,
            waveplate_retardance_sigma: 0.0,
            repeatability_sigma: 0.0,
            hom_visibility: 1.0,
            hom_visibility_sigma: 0.0,
            statistical_noise: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("waveplate_angle_sigma", self.waveplate_angle_sigma),
            ("waveplate_retardance_sigma", self.waveplate_retardance_sigma),
            ("repeatability_sigma", self.repeatability_sigma),
            ("hom_visibility_sigma", self.hom_visibility_sigma),
        ];
        for (name, s) in sigmas {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(HarnessError::Config(format!("{name} must be finite and >= 0, got {s}")));
            }
        }
        if !(0.0..=1.0).contains(&self.hom_visibility) {
            return Err(HarnessError::Config(format!(
                "hom_visibility must lie in [0, 1], got {}",
                self.hom_visibility
            )));
        }
        if self.shots_per_basis == 0 {
            return Err(HarnessError::Config("shots_per_basis must be positive".into()));
        }
        if self.broadcast_counts_per_setting == 0 {
            return Err(HarnessError::Config(
                "broadcast_counts_per_setting must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Draws an interference visibility clipped to [0, 1].
    pub fn sample_visibility<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        gaussian(self.hom_visibility, self.hom_visibility_sigma, rng).clamp(0.0, 1.0)
    }
}

fn gaussian<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        mean
    } else {
        Normal::new(mean, sigma).expect("validated sigma").sample(rng)
    }
}

/// Jones matrix of a wave plate with fast axis at `theta` (radians) and
/// retardance `gamma`, up to a global phase.
pub fn waveplate(theta: f64, gamma: f64) -> CMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    let e = Complex64::from_polar(1.0, gamma);
    let r = |v: f64| Complex64::new(v, 0.0);
    // R(−θ)·diag(1, e^{iγ})·R(θ) with R(θ) = [[c, s], [−s, c]].
    CMatrix::from_vec(
        2,
        2,
        vec![
            r(c * c) + e * s * s,
            r(c * s) - e * c * s,
            r(c * s) - e * c * s,
            r(s * s) + e * c * c,
        ],
    )
    .expect("2x2")
}

/// Quarter- and half-wave plate angles (degrees) selecting the +1
/// eigenvector of X, Y, Z in the transmitted port.
pub fn nominal_angles(pauli: char) -> (f64, f64) {
    match pauli {
        'X' => (45.0, 22.5),
        'Y' => (0.0, -22.5),
        'Z' => (0.0, 0.0),
        other => panic!("unknown Pauli label {other}"),
    }
}

/// One analyser's plates: (angle offset in degrees, retardance).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plate {
    pub offset_deg: f64,
    pub retardance: f64,
}

/// Transmitted and reflected projectors of a QWP-HWP-PBS analyser.
pub fn analyser_projectors(q_deg: f64, h_deg: f64, qwp: Plate, hwp: Plate) -> [CMatrix; 2] {
    let wq = waveplate((q_deg + qwp.offset_deg).to_radians(), qwp.retardance);
    let wh = waveplate((h_deg + hwp.offset_deg).to_radians(), hwp.retardance);
    let u = &wh * &wq;
    // Transmitted state: U†|H⟩, the first column of U†.
    let ud = u.adjoint();
    let t = [ud[(0, 0)], ud[(1, 0)]];
    let r = [ud[(0, 1)], ud[(1, 1)]];
    [CMatrix::projector(&t), CMatrix::projector(&r)]
}

/// The nine Pauli product bases as realised by imperfect analysers, in the
/// same order and labelling as [`pauli_bases`].
pub fn perturbed_bases<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> Vec<Basis> {
    let mut calibrate = |gamma: f64| Plate {
        offset_deg: gaussian(0.0, model.waveplate_angle_sigma, rng),
        retardance: gamma + gaussian(0.0, model.waveplate_retardance_sigma, rng),
    };
    let quarter = std::f64::consts::FRAC_PI_2;
    let half = std::f64::consts::PI;
    // Per qubit: (QWP, HWP).
    let plates: [(Plate, Plate); 2] = [
        (calibrate(quarter), calibrate(half)),
        (calibrate(quarter), calibrate(half)),
    ];
    let mut jitter = |p: Plate| Plate {
        offset_deg: p.offset_deg + gaussian(0.0, model.repeatability_sigma, rng),
        ..p
    };
    pauli_bases()
        .into_iter()
        .map(|nominal| {
            let labels: Vec<char> = nominal.label.chars().collect();
            let mut per_qubit = Vec::with_capacity(2);
            for (k, &l) in labels.iter().enumerate() {
                let (q, h) = nominal_angles(l);
                let (qwp, hwp) = plates[k];
                per_qubit.push(analyser_projectors(q, h, jitter(qwp), jitter(hwp)));
            }
            let projectors = per_qubit[0]
                .iter()
                .flat_map(|a| per_qubit[1].iter().map(move |b| kron(a, b)))
                .collect();
            Basis {
                label: nominal.label,
                projectors,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::tomography::pauli_eigenprojectors;
    use rand::SeedableRng;

    fn ideal() -> Plate {
        Plate {
            offset_deg: 0.0,
            retardance: 0.0,
        }
    }

    #[test]
    fn nominal_analysers_match_pauli_projectors() {
        let qwp = Plate {
            retardance: std::f64::consts::FRAC_PI_2,
            ..ideal()
        };
        let hwp = Plate {
            retardance: std::f64::consts::PI,
            ..ideal()
        };
        for p in ['X', 'Y', 'Z'] {
            let (q, h) = nominal_angles(p);
            let got = analyser_projectors(q, h, qwp, hwp);
            let want = pauli_eigenprojectors(p);
            assert!(got[0].approx_eq(&want[0], 1e-12), "{p}");
            assert!(got[1].approx_eq(&want[1], 1e-12), "{p}");
        }
    }

    #[test]
    fn noiseless_bases_are_ideal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let got = perturbed_bases(&NoiseModel::noiseless(), &mut rng);
        for (g, w) in got.iter().zip(pauli_bases()) {
            assert_eq!(g.label, w.label);
            for (a, b) in g.projectors.iter().zip(&w.projectors) {
                assert!(a.approx_eq(b, 1e-12));
            }
        }
    }

    #[test]
    fn perturbed_bases_stay_complete() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let model = NoiseModel {
            waveplate_angle_sigma: 2.0,
            waveplate_retardance_sigma: 0.1,
            repeatability_sigma: 1.0,
            ..NoiseModel::default()
        };
        let bases = perturbed_bases(&model, &mut rng);
        let ideal = pauli_bases();
        let mut moved = 0.0f64;
        for (b, w) in bases.iter().zip(&ideal) {
            let mut sum = CMatrix::zeros(4, 4);
            for p in &b.projectors {
                sum += p;
            }
            assert!(sum.approx_eq(&CMatrix::identity(4), 1e-12));
            moved = moved.max(b.projectors[0].max_abs_diff(&w.projectors[0]));
        }
        assert!(moved > 1e-3 && moved < 0.2, "{moved}");
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::default().validate().is_ok());
        let bad = NoiseModel {
            hom_visibility: 1.2,
            ..NoiseModel::default()
        };
        assert!(bad.validate().is_err());
        let bad = NoiseModel {
            repeatability_sigma: -1.0,
            ..NoiseModel::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_defaults_fill_missing_fields() {
        let m: NoiseModel = serde_json::from_str(r#"{"shots_per_basis": 500}"#).unwrap();
        assert_eq!(m.shots_per_basis, 500);
        assert_eq!(m.hom_visibility, 0.97);
    }
}
