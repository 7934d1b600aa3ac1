use serde::{Deserialize, Serialize};

use super::{SdpProblem, SdpSolution, SolveOptions};

/// Independent recomputation of a solution's feasibility and objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub max_residual: f64,
    pub worst_constraint: Option<String>,
    pub min_block_eigenvalue: f64,
    pub worst_block: Option<String>,
    pub bound_violation: f64,
    pub objective: f64,
    pub objective_mismatch: f64,
    pub issues: Vec<String>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks residuals, block eigenvalue floors, scalar bounds and the reported
/// objective against 10× the solver tolerances.
pub fn verify(problem: &SdpProblem, solution: &SdpSolution, opts: &SolveOptions) -> VerifyReport {
    let feas = 10.0 * opts.feas_tol;
    let gap = 10.0 * opts.gap_tol;
    let mut issues = Vec::new();

    if solution.blocks.len() != problem.blocks.len() || solution.scalars.len() != problem.scalars.len() {
        issues.push("solution shape does not match problem".to_string());
        return VerifyReport {
            max_residual: f64::NAN,
            worst_constraint: None,
            min_block_eigenvalue: f64::NAN,
            worst_block: None,
            bound_violation: f64::NAN,
            objective: f64::NAN,
            objective_mismatch: f64::NAN,
            issues,
        };
    }

    let mut max_residual = 0.0;
    let mut worst_constraint = None;
    for c in &problem.constraints {
        let r = (c.form.evaluate(&solution.blocks, &solution.scalars) - c.rhs).abs();
        if r > max_residual || r.is_nan() {
            max_residual = r;
            worst_constraint = Some(c.label.clone());
        }
    }
    if !(max_residual <= feas) {
        issues.push(format!(
            "equality residual {max_residual:.3e} at {} exceeds {feas:.1e}",
            worst_constraint.as_deref().unwrap_or("?")
        ));
    }

    let mut min_eig = f64::INFINITY;
    let mut worst_block = None;
    for (spec, x) in problem.blocks.iter().zip(&solution.blocks) {
        let asym = (0..x.rows())
            .flat_map(|r| (0..x.cols()).map(move |c| (r, c)))
            .map(|(r, c)| (x[(r, c)] - x[(c, r)]).abs())
            .fold(0.0, f64::max);
        if asym > feas {
            issues.push(format!("block {} is not symmetric ({asym:.3e})", spec.name));
        }
        let e = x.min_sym_eig();
        if e < min_eig || e.is_nan() {
            min_eig = e;
            worst_block = Some(spec.name.clone());
        }
    }
    if problem.blocks.is_empty() {
        min_eig = 0.0;
    }
    if !(min_eig >= -feas) {
        issues.push(format!(
            "block {} has eigenvalue {min_eig:.3e} below -{feas:.1e}",
            worst_block.as_deref().unwrap_or("?")
        ));
    }

    let mut bound_violation: f64 = 0.0;
    for (spec, &v) in problem.scalars.iter().zip(&solution.scalars) {
        if let Some(l) = spec.lower {
            bound_violation = bound_violation.max(l - v);
        }
        if let Some(u) = spec.upper {
            bound_violation = bound_violation.max(v - u);
        }
        if !v.is_finite() {
            bound_violation = f64::INFINITY;
        }
    }
    if bound_violation > feas {
        issues.push(format!("scalar bound violated by {bound_violation:.3e}"));
    }

    let objective = problem.objective.evaluate(&solution.blocks, &solution.scalars);
    let objective_mismatch = (objective - solution.objective).abs();
    let scale = 1.0f64.max(objective.abs());
    if !(objective_mismatch <= gap * scale) {
        issues.push(format!(
            "reported objective differs from recomputed by {objective_mismatch:.3e}"
        ));
    }
    if solution.dual_objective.is_finite() && (solution.dual_objective - objective).abs() > gap * scale {
        issues.push(format!(
            "duality gap {:.3e} exceeds {:.1e}",
            (solution.dual_objective - objective).abs(),
            gap * scale
        ));
    }

    VerifyReport {
        max_residual,
        worst_constraint,
        min_block_eigenvalue: min_eig,
        worst_block,
        bound_violation,
        objective,
        objective_mismatch,
        issues,
    }
}
