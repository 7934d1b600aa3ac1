//! Locality certificate η for isotropic states and a noisy non-isotropic
//! state, followed by an independent re-check of the decomposition.

use nlactivation::certify::{lhv_certificate, verify_certificate};
use nlactivation::quantum::{depolarize_qubit, isotropic_state, phi_plus, DensityMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for alpha in [0.5, 0.637, 0.6875, 0.8] {
        let cert = lhv_certificate(&isotropic_state(alpha)?)?;
        println!(
            "W_{alpha:<6} eta = {:.6}  local for all POVMs: {}",
            cert.eta,
            cert.certifies_local()
        );
    }

    // Maximally entangled pair with one photon passing a depolarizing channel.
    let bell = DensityMatrix::pure(&phi_plus(), vec![2, 2])?;
    let rho = depolarize_qubit(&bell, 1, 0.45)?;
    let cert = lhv_certificate(&rho)?;
    let check = verify_certificate(&cert, &rho)?;
    println!("depolarized Bell state: eta = {:.6}, q = {:.4}", cert.eta, cert.q);
    println!(
        "re-check: reconstruction residual {:.2e}, issues {:?}",
        check.residues.reconstruction, check.issues
    );
    Ok(())
}
