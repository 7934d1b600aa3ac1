//! Adjoints of positive trace-preserving qubit maps send two-outcome
//! measurements to valid measurements.

use nlactivation::certify::random_positive_tp_map;
use nlactivation::matcore::{min_eigenvalue, CMatrix};
use nlactivation::quantum::random_dichotomic;
use rand::SeedableRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let (mut worst_psd, mut worst_sum) = (f64::INFINITY, 0.0f64);
    for seed in 0..200 {
        let map = random_positive_tp_map(seed);
        let [e0, e1] = random_dichotomic(&mut rng, "M").projectors();
        let (f0, f1) = (map.adjoint(&e0), map.adjoint(&e1));
        worst_psd = worst_psd.min(min_eigenvalue(&f0)?).min(min_eigenvalue(&f1)?);
        worst_sum = worst_sum.max((&f0 + &f1).max_abs_diff(&CMatrix::identity(2)));
    }
    println!("200 maps: smallest effect eigenvalue {worst_psd:.3e}, completeness error {worst_sum:.3e}");
    Ok(())
}
