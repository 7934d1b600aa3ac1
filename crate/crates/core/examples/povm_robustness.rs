//! Joint measurability of the four effective POVMs that the broadcast
//! channel and the two receivers induce on the sender's partner qubit.

use nlactivation::broadcast::activation_settings;
use nlactivation::certify::povm_noise_robustness;
use nlactivation::quantum::{broadcast_isometry, effective_povms};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let povms = effective_povms(&broadcast_isometry(), &activation_settings())?;
    for (k, p) in povms.iter().enumerate() {
        println!("POVM (y, z) = ({}, {}): {} effects", k / 2, k % 2, p.len());
    }
    let r = povm_noise_robustness(&povms)?;
    println!(
        "white-noise robustness t = {:.6} ({} deterministic strategies)",
        r.t, r.strategies
    );
    println!("solver: {:?} after {} iterations", r.solver.status, r.solver.iterations);
    Ok(())
}
