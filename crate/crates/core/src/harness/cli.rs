//! Command-line front end. Exit codes: 0 success, 1 invalid input or a
//! failed check, 2 solver failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::bipartite::witness_report;
use crate::broadcast::{
    activation_settings, behavior_from_counts, broadcast_value, channel_behavior, no_signalling_residuals, Behavior,
    Counts, InequalityResult, NsResiduals,
};
use crate::certify::{lhs_certificate, lhv_certificate, povm_noise_robustness, verify_certificate, CertificateResult};
use crate::quantum::{assemblage, born_behavior, broadcast_isometry, effective_povms, isotropic_state, DensityMatrix};

use super::io::{create, read_json, write_json, write_jsonl, write_summary_csv, write_sweep_csv};
use super::montecarlo::{run_montecarlo, MontecarloConfig};
use super::sweep::{parse_alphas, sweep_alpha};
use super::{HarnessError, Result};

#[derive(Debug, Parser)]
#[command(name = "nlactivation", version, about = "Broadcast nonlocality activation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Noiseless S, I_B, η and CHSH curves over W_α as CSV.
    Sweep {
        /// `start:stop:step` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0:1:0.05")]
        alphas: String,
        /// Interference visibility of the broadcast channel.
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Locality certificate η of a two-qubit state, as JSON.
    Certify {
        state: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Horodecki CHSH value, PPT test and correlation matrix.
    Witness { state: PathBuf },
    /// Broadcast inequality and no-signalling residuals. A two-qubit state
    /// is sent through the broadcast channel; a three-qubit state is
    /// measured directly; `--counts` evaluates recorded counts.
    Broadcast {
        #[arg(required_unless_present = "counts", conflicts_with = "counts")]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        /// CSV with columns x,y,z,a,b,c,count.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Monte Carlo error propagation driven by a JSON config.
    Montecarlo {
        config: PathBuf,
        /// Overrides the config's worker count.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        summary_csv: Option<PathBuf>,
        #[arg(long)]
        trials_jsonl: Option<PathBuf>,
    },
    /// White-noise joint-measurability robustness of the four effective
    /// broadcast POVMs; with `--alpha`, the LHS test of the W_α assemblage.
    Robustness {
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Independent residual check of a certificate against a state.
    Verify { certificate: PathBuf, state: PathBuf },
}

#[derive(Serialize)]
struct BroadcastReport {
    #[serde(flatten)]
    inequality: InequalityResult,
    no_signalling: NsResiduals,
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_solver_failure() {
                2
            } else {
                1
            }
        }
    }
}

/// Entry point for the binary.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_json(value, create(p)?),
        None => write_json(value, out),
    }
}

fn read_state(path: &Path) -> Result<DensityMatrix> {
    read_json(path)
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Sweep {
            alphas,
            visibility,
            output,
        } => {
            let rows = sweep_alpha(&parse_alphas(&alphas)?, visibility)?;
            match output {
                Some(p) => write_sweep_csv(&rows, create(&p)?)?,
                None => write_sweep_csv(&rows, out)?,
            }
        }
        Command::Certify { state, output } => {
            let cert = lhv_certificate(&read_state(&state)?)?;
            emit_json(&cert, output.as_deref(), out)?;
        }
        Command::Witness { state } => {
            emit_json(&witness_report(&read_state(&state)?)?, None, out)?;
        }
        Command::Broadcast {
            state,
            visibility,
            counts,
        } => {
            let behavior = broadcast_behavior(state.as_deref(), visibility, counts.as_deref())?;
            let report = BroadcastReport {
                inequality: broadcast_value(&behavior),
                no_signalling: no_signalling_residuals(&behavior),
            };
            emit_json(&report, None, out)?;
        }
        Command::Montecarlo {
            config,
            threads,
            summary_csv,
            trials_jsonl,
        } => {
            let mut cfg: MontecarloConfig = read_json(&config)?;
            cfg.threads = threads.or(cfg.threads);
            cfg.summary_csv = summary_csv.or(cfg.summary_csv);
            cfg.trials_jsonl = trials_jsonl.or(cfg.trials_jsonl);
            cfg.validate()?;
            let report = run_montecarlo(cfg.target_alpha, &cfg.noise, cfg.trials, cfg.seed, cfg.threads)?;
            match &cfg.summary_csv {
                Some(p) => write_summary_csv(&report, create(p)?)?,
                None => write_summary_csv(&report, &mut *out)?,
            }
            if let Some(p) = &cfg.trials_jsonl {
                write_jsonl(&report.records, create(p)?)?;
            }
            let _ = writeln!(
                err,
                "{} trials, eta >= 1 in {:.1}% of them",
                report.summary.trials,
                100.0 * report.summary.eta_at_least_one
            );
            if !report.summary.all_verified {
                let _ = writeln!(err, "some certificates failed re-verification");
                return Ok(1);
            }
        }
        Command::Robustness { alpha } => {
            let povms = effective_povms(&broadcast_isometry(), &activation_settings())?;
            match alpha {
                None => emit_json(&povm_noise_robustness(&povms)?, None, out)?,
                Some(a) => {
                    let sigma = assemblage(&isotropic_state(a)?, &povms)?;
                    emit_json(&lhs_certificate(&sigma)?, None, out)?;
                }
            }
        }
        Command::Verify { certificate, state } => {
            let cert: CertificateResult = read_json(&certificate)?;
            let check = verify_certificate(&cert, &read_state(&state)?)?;
            emit_json(&check, None, out)?;
            if !check.is_valid() {
                let _ = writeln!(err, "certificate rejected: {}", check.issues.join("; "));
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn broadcast_behavior(state: Option<&Path>, visibility: f64, counts: Option<&Path>) -> Result<Behavior> {
    if let Some(path) = counts {
        let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        return Ok(behavior_from_counts(&Counts::read_csv(file)?)?);
    }
    let rho = read_state(state.expect("clap enforces state or counts"))?;
    match rho.dims() {
        [2, 2] => Ok(channel_behavior(&rho, &activation_settings(), visibility)?),
        [2, 2, 2] => {
            if visibility != 1.0 {
                return Err(HarnessError::Config(
                    "--visibility applies to two-qubit inputs only".into(),
                ));
            }
            Ok(born_behavior(&rho, &activation_settings())?)
        }
        dims => Err(HarnessError::Config(format!(
            "expected a two- or three-qubit state, got dims {dims:?}"
        ))),
    }
}
