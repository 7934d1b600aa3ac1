//! File formats.
//!
//! JSON uses serde_json's shortest round-trip float representation, so every
//! value reads back bit-identical. Summary CSV rounds to six significant
//! digits; sweep CSV keeps full precision because it feeds plots and checks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::montecarlo::{MontecarloReport, TrialRecord};
use super::sweep::SweepRow;
use super::{HarnessError, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| HarnessError::io("<output>", e))?;
    Ok(())
}

/// Opens `path` for writing, wrapping errors with the path.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "S", "I_B", "eta", "max_chsh"])?;
    for r in rows {
        w.write_record([r.alpha, r.s, r.i_b, r.eta, r.max_chsh].map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

const SUMMARY_HEADER: [&str; 12] = [
    "source",
    "trials",
    "alpha",
    "alpha_std",
    "fidelity",
    "fidelity_std",
    "S",
    "S_std",
    "I_B",
    "I_B_std",
    "eta",
    "eta_std",
];

/// One simulated row, then the measured reference row when the target α
/// matches one. Reference I_B is derived as S − 4.
pub fn write_summary_csv<W: Write>(report: &MontecarloReport, out: W) -> Result<()> {
    let g = |v: f64| format_sig(v, 6);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    let mut row = vec!["simulation".to_string(), report.summary.trials.to_string()];
    for name in ["alpha", "fidelity", "S", "I_B", "eta"] {
        let c = report.summary.column(name).expect("column present");
        row.push(g(c.mean));
        row.push(g(c.std));
    }
    w.write_record(&row)?;
    if let Some(r) = report.reference {
        let mut row = vec![format!("reference_{}", r.label), String::new()];
        for (v, e) in [r.alpha, r.fidelity, r.s, (r.s.0 - 4.0, r.s.1), r.eta] {
            row.push(g(v));
            row.push(g(e));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

pub fn write_jsonl<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out).map_err(|e| HarnessError::io("<jsonl>", e))?;
    }
    out.flush().map_err(|e| HarnessError::io("<jsonl>", e))?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(HarnessError::from))
        .collect()
}
