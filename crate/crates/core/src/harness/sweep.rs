//! Noiseless curves as a function of the isotropic parameter.

use serde::{Deserialize, Serialize};

use crate::bipartite::horodecki_max_chsh;
use crate::broadcast::{ideal_curve, LOCAL_BOUND};
use crate::certify::lhv_certificate;
use crate::quantum::isotropic_state;

use super::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I_B")]
    pub i_b: f64,
    pub eta: f64,
    pub max_chsh: f64,
}

/// Broadcast value through a channel of the given visibility, certificate
/// and Horodecki value of W_α for every α, sorted by α.
pub fn sweep_alpha(alphas: &[f64], visibility: f64) -> Result<Vec<SweepRow>> {
    let mut sorted = alphas.to_vec();
    if let Some(bad) = sorted.iter().find(|a| !a.is_finite()) {
        return Err(HarnessError::Config(format!("alpha {bad} is not finite")));
    }
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .map(|alpha| {
            let s = ideal_curve(alpha, visibility)?;
            let w = isotropic_state(alpha)?;
            Ok(SweepRow {
                alpha,
                s,
                i_b: s - LOCAL_BOUND,
                eta: lhv_certificate(&w)?.eta,
                max_chsh: horodecki_max_chsh(&w)?,
            })
        })
        .collect()
}

/// Parses `start:stop:step` (stop included when hit to within step/1e6) or a
/// comma-separated list.
pub fn parse_alphas(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| HarnessError::Config(format!("alpha list {spec:?}: {what}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("{s:?} is not a number")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || !(stop >= start) {
                return Err(bad("need step > 0 and stop >= start"));
            }
            let n = ((stop - start) / step + 1e-6).floor() as usize;
            if n > 100_000 {
                return Err(bad("too many points"));
            }
            // Index-based to avoid accumulating rounding error.
            Ok((0..=n).map(|k| start + k as f64 * step).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(bad("expected start:stop:step or a comma list")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let a = parse_alphas("0:1:0.05").unwrap();
        assert_eq!(a.len(), 21);
        assert!((a[20] - 1.0).abs() < 1e-12);
        assert_eq!(parse_alphas("0.5, 0.6").unwrap(), vec![0.5, 0.6]);
        assert!(parse_alphas("0:1").is_err());
        assert!(parse_alphas("1:0:0.1").is_err());
        assert!(parse_alphas("x").is_err());
    }

    #[test]
    fn landmark_rows() {
        let third = 1.0 / 3f64.sqrt();
        let rows = sweep_alpha(&[std::f64::consts::FRAC_1_SQRT_2, 0.6875, third], 1.0).unwrap();
        assert_eq!(rows[0].alpha, third);
        assert!(rows[0].i_b.abs() < 1e-9);
        assert!((rows[1].eta - 1.0).abs() < 1e-3);
        assert!((rows[2].max_chsh - 2.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_alpha_is_rejected() {
        assert!(sweep_alpha(&[1.2], 1.0).is_err());
        assert!(sweep_alpha(&[0.5], 1.5).is_err());
    }
}
