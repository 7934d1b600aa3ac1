//! Bisects the isotropic parameter at which the assemblage prepared by the
//! effective broadcast POVMs stops admitting a local-hidden-state model.

use nlactivation::broadcast::activation_settings;
use nlactivation::certify::lhs_certificate;
use nlactivation::quantum::{assemblage, broadcast_isometry, effective_povms, isotropic_state};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let povms = effective_povms(&broadcast_isometry(), &activation_settings())?;
    let unsteerable = |alpha: f64| -> Result<bool, Box<dyn std::error::Error>> {
        let sigma = assemblage(&isotropic_state(alpha)?, &povms)?;
        Ok(lhs_certificate(&sigma)?.unsteerable)
    };
    let (mut lo, mut hi) = (0.5, 1.0);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if unsteerable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!("unsteerable up to alpha = {:.4}", 0.5 * (lo + hi));
    Ok(())
}
