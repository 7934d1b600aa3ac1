//! Error propagation through the full pipeline with the default noise
//! model, reported in the same shape as the `montecarlo` subcommand.

use nlactivation::harness::io::write_summary_csv;
use nlactivation::harness::{run_montecarlo, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    let report = run_montecarlo(0.637, &NoiseModel::default(), trials, 42, None)?;
    write_summary_csv(&report, std::io::stdout().lock())?;
    println!("eta >= 1 in {:.1}% of trials", 100.0 * report.summary.eta_at_least_one);
    let ns = report.summary.column("ns_mean").expect("column");
    println!("no-signalling residual: {:.4} +- {:.4}", ns.mean, ns.std);
    Ok(())
}
