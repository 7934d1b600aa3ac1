//! Synthetic 36-projector tomography of an isotropic state followed by
//! maximum-likelihood reconstruction.

use nlactivation::quantum::tomography::{mle_reconstruct_detailed, simulate_tomography};
use nlactivation::quantum::{best_fit_alpha, fidelity, isotropic_state};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target = isotropic_state(0.65)?;
    for shots in [1_000, 10_000, 100_000] {
        let record = simulate_tomography(&target, shots, 2024);
        let mle = mle_reconstruct_detailed(&record)?;
        let (alpha, f_fit) = best_fit_alpha(&mle.state)?;
        println!(
            "{shots:>7} shots/basis: F(target) = {:.6}, fitted alpha = {alpha:.5} (F = {f_fit:.6}), {} iterations",
            fidelity(&mle.state, &target)?,
            mle.iterations
        );
    }
    Ok(())
}
