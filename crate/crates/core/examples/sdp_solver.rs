//! Direct use of the SDP layer: the largest eigenvalue of a symmetric
//! matrix as max ⟨C, X⟩ subject to Tr X = 1, X ⪰ 0.

use nlactivation::matcore::RMatrix;
use nlactivation::sdp::{solve, verify, LinearForm, SdpProblem, SolveOptions};

fn main() {
    let c = RMatrix::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 3);
    p.add_constraint("trace", LinearForm::new().block(x, RMatrix::identity(3)), 1.0);
    p.set_objective(LinearForm::new().block(x, c));
    let opts = SolveOptions::default();
    let s = solve(&p, &opts);
    println!("status {:?} in {} iterations", s.status, s.iterations);
    println!(
        "objective {:.10} (closed form 2 + sqrt 2 = {:.10})",
        s.objective,
        2.0 + 2f64.sqrt()
    );
    println!("duality gap {:.2e}", s.duality_gap);
    println!("independent check clean: {}", verify(&p, &s, &opts).is_clean());
}
