use super::*;
use crate::matcore::{herm_eigvals, RMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

fn sym_unit(n: usize, i: usize, j: usize) -> RMatrix {
    // ⟨E, X⟩ = X_ij for symmetric X.
    let mut m = RMatrix::zeros(n, n);
    if i == j {
        m[(i, i)] = 1.0;
    } else {
        m[(i, j)] = 0.5;
        m[(j, i)] = 0.5;
    }
    m
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn assert_optimal(p: &SdpProblem, s: &SdpSolution) {
    assert_eq!(s.status, SdpStatus::Optimal, "{s:?}");
    let report = verify(p, s, &opts());
    assert!(report.is_clean(), "{report:?}");
}

fn psd_boundary() -> SdpProblem {
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 2);
    let t = p.add_scalar("t", None, None);
    p.add_constraint("x00", LinearForm::new().block(x, sym_unit(2, 0, 0)), 1.0);
    p.add_constraint("x11", LinearForm::new().block(x, sym_unit(2, 1, 1)), 1.0);
    p.add_constraint(
        "x01",
        LinearForm::new().block(x, sym_unit(2, 0, 1)).scalar(t, -1.0),
        0.0,
    );
    p.set_objective(LinearForm::new().scalar(t, 1.0));
    p
}

fn eigen_lp(c: RMatrix) -> SdpProblem {
    let n = c.rows();
    let mut p = SdpProblem::new();
    let x = p.add_block("X", n);
    p.add_constraint("trace", LinearForm::new().block(x, RMatrix::identity(n)), 1.0);
    p.set_objective(LinearForm::new().block(x, c));
    p
}

#[test]
fn psd_boundary_gives_one() {
    let p = psd_boundary();
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    assert!((s.objective - 1.0).abs() < 1e-7, "{}", s.objective);
}

#[test]
fn max_eigenvalue_lp() {
    let p = eigen_lp(RMatrix::from_diag(&[3.0, 1.0]));
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    assert!((s.objective - 3.0).abs() < 1e-7);
}

#[test]
fn psd_dominating_minimum_trace() {
    // A = R diag(-1, 2) Rᵀ.
    let (c, sn) = (0.3f64.cos(), 0.3f64.sin());
    let r = RMatrix::from_rows(&[&[c, -sn], &[sn, c]]);
    let a = r.congruence(&RMatrix::from_diag(&[-1.0, 2.0]));
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 2);
    let slack = p.add_block("S", 2);
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let e = sym_unit(2, i, j);
        p.add_constraint(
            format!("x{i}{j}"),
            LinearForm::new().block(x, e.clone()).block(slack, e.scale(-1.0)),
            a[(i, j)],
        );
    }
    p.set_objective(LinearForm::new().block(x, RMatrix::identity(2).scale(-1.0)));
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    assert!((s.objective + 2.0).abs() < 1e-7, "{}", s.objective);
}

#[test]
fn diagonal_lp_vertex() {
    let mut p = SdpProblem::new();
    let x = p.add_block("x", 1);
    let y = p.add_block("y", 1);
    let one = RMatrix::identity(1);
    p.add_constraint(
        "budget",
        LinearForm::new().block(x, one.clone()).block(y, one.scale(2.0)),
        2.0,
    );
    p.set_objective(LinearForm::new().block(x, one.clone()).block(y, one));
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    assert!((s.objective - 2.0).abs() < 1e-7);
    assert!((s.block(x)[(0, 0)] - 2.0).abs() < 1e-6);
}

#[test]
fn negative_trace_is_primal_infeasible() {
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 2);
    p.add_constraint("trace", LinearForm::new().block(x, RMatrix::identity(2)), -1.0);
    p.set_objective(LinearForm::new());
    let s = solve(&p, &opts());
    assert_eq!(s.status, SdpStatus::PrimalInfeasible, "{:?}", s.history.last());
}

#[test]
fn inconsistent_duplicate_rows_are_infeasible() {
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 2);
    p.add_constraint("a", LinearForm::new().block(x, RMatrix::identity(2)), 1.0);
    p.add_constraint("b", LinearForm::new().block(x, RMatrix::identity(2).scale(2.0)), 3.0);
    let s = solve(&p, &opts());
    assert_eq!(s.status, SdpStatus::PrimalInfeasible);
}

#[test]
fn unbounded_objective_is_dual_infeasible() {
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 2);
    p.add_constraint("x01", LinearForm::new().block(x, sym_unit(2, 0, 1)), 0.0);
    p.set_objective(LinearForm::new().block(x, RMatrix::identity(2)));
    let s = solve(&p, &opts());
    assert_eq!(s.status, SdpStatus::DualInfeasible, "{:?}", s.history.last());
}

#[test]
fn redundant_rows_are_dropped() {
    let mut p = eigen_lp(RMatrix::from_diag(&[2.0, 5.0]));
    let x = BlockId(0);
    p.add_constraint(
        "trace again",
        LinearForm::new().block(x, RMatrix::identity(2).scale(3.0)),
        3.0,
    );
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    assert!((s.objective - 5.0).abs() < 1e-7);
}

#[test]
fn bounded_scalars() {
    // max s with s ≤ 0.25 and s ≤ X01 where X ⪰ 0, diag(X) = 1.
    let mut p = psd_boundary();
    p.scalars[0].upper = Some(0.25);
    p.scalars[0].lower = Some(-3.0);
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    assert!((s.objective - 0.25).abs() < 1e-7);
    // Upper bound only.
    let mut p = psd_boundary();
    p.scalars[0].upper = Some(0.5);
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    assert!((s.objective - 0.5).abs() < 1e-7);
}

#[test]
fn hermitian_block_max_eigenvalue() {
    let g = CMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.3, -0.8),
            Complex64::new(0.3, 0.8),
            Complex64::new(-0.5, 0.0),
        ],
    )
    .unwrap();
    let mut p = SdpProblem::new();
    let h = p.add_hermitian_block("H", 2);
    let trace = |m: &CMatrix| CMatrix::identity(1).scale_c(m.trace());
    p.add_hermitian_equality("trace", &[MapTerm { var: h, map: &trace }], &[], &CMatrix::identity(1));
    p.set_objective(LinearForm::new().hermitian(h, &g));
    let s = solve(&p, &opts());
    assert_optimal(&p, &s);
    let top = *herm_eigvals(&g).unwrap().last().unwrap();
    assert!((s.objective - top).abs() < 1e-7);
    let hv = s.hermitian(h);
    assert!((hv.trace().re - 1.0).abs() < 1e-8);
}

#[test]
fn objective_scaling() {
    let c = RMatrix::from_rows(&[&[1.0, 0.4, 0.0], &[0.4, -0.2, 0.3], &[0.0, 0.3, 0.5]]);
    let p1 = eigen_lp(c.clone());
    let p10 = eigen_lp(c.scale(10.0));
    let s1 = solve(&p1, &opts());
    let s10 = solve(&p10, &opts());
    assert_optimal(&p1, &s1);
    assert_optimal(&p10, &s10);
    assert!((s10.objective - 10.0 * s1.objective).abs() < 1e-6);
    assert!(s1.blocks[0].max_abs_diff(&s10.blocks[0]) < 1e-6);
}

#[test]
fn weak_duality_on_feasible_iterates() {
    let p = psd_boundary();
    let s = solve(&p, &opts());
    for h in &s.history {
        if h.primal_residual < 1e-12 && h.dual_residual < 1e-12 {
            assert!(h.primal_objective <= h.dual_objective + 1e-12 * (1.0 + h.dual_objective.abs()));
        }
    }
}

#[test]
fn verify_flags_perturbations() {
    let p = eigen_lp(RMatrix::from_diag(&[3.0, 1.0]));
    let s = solve(&p, &opts());
    let mut bad = s.clone();
    bad.blocks[0][(1, 1)] += 1e-3;
    let r = verify(&p, &bad, &opts());
    assert!(!r.is_clean());
    assert!(r.max_residual > 9e-4);

    let mut neg = s.clone();
    neg.blocks[0] = RMatrix::from_diag(&[1.0 + 1e-6, -1e-6]);
    neg.objective = p.objective.evaluate(&neg.blocks, &neg.scalars);
    neg.dual_objective = neg.objective;
    let r = verify(&p, &neg, &opts());
    assert!(r.issues.iter().any(|i| i.contains("eigenvalue")), "{r:?}");
}

#[test]
fn malformed_problem_rejected() {
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 2);
    p.add_constraint("bad", LinearForm::new().block(x, RMatrix::identity(3)), 1.0);
    assert!(p.validate().is_err());
    let mut p = SdpProblem::new();
    let x = p.add_block("X", 2);
    p.add_constraint(
        "asym",
        LinearForm::new().block(x, RMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]])),
        1.0,
    );
    assert!(p.validate().is_err());
}

#[test]
fn sparse_dump_lists_nonzeros() {
    let p = psd_boundary();
    let mut buf = Vec::new();
    write_sparse(&p, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("3 0 0 1 5e-1"));
    assert!(text.contains("3 s0 0 0 -1e0"));
    assert!(text.contains("1 rhs 0 0 1e0"));
}

#[test]
fn deterministic() {
    let p = psd_boundary();
    assert_eq!(solve(&p, &opts()), solve(&p, &opts()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // max ⟨C, X⟩ over 2×2 density matrices vs. a grid over the Bloch ball.
    #[test]
    fn matches_bloch_grid(a in -1.0f64..1.0, b in -1.0f64..1.0, d in -1.0f64..1.0) {
        let c = RMatrix::from_rows(&[&[a, b], &[b, d]]);
        let s = solve(&eigen_lp(c.clone()), &opts());
        prop_assert_eq!(s.status, SdpStatus::Optimal);
        // Real symmetric density matrices: X = (I + x σx + z σz)/2, x² + z² ≤ 1.
        let mut best = f64::NEG_INFINITY;
        let steps = 2000;
        for k in 0..steps {
            let th = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
            let (x, z) = (th.cos(), th.sin());
            let v = 0.5 * (a * (1.0 + z) + d * (1.0 - z)) + b * x;
            best = best.max(v);
        }
        prop_assert!((s.objective - best).abs() < 1e-4, "{} vs {}", s.objective, best);
    }
}
