//! Infeasible-start primal-dual interior-point method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! Internally the problem is put in the standard form
//! min ⟨C, X⟩ s.t. A(X) = b, X ⪰ 0 over a list of blocks, with dual
//! max bᵀy s.t. Aᵀ(y) + Z = C, Z ⪰ 0. Scalars become 1×1 blocks: a lower
//! bound shifts the variable, an upper bound adds a slack block and a row,
//! and a free scalar is split into two nonnegative parts.

use super::{IterateInfo, SdpProblem, SdpSolution, SdpStatus, SolveOptions};
use crate::matcore::RMatrix;

const STEP_FRACTION: f64 = 0.98;
const DEPENDENT_ROW_TOL: f64 = 1e-10;
const INFEASIBILITY_RAY_TOL: f64 = 1e-8;

/// How an original scalar is recovered from standard-form blocks.
#[derive(Clone, Copy, Debug)]
enum ScalarMap {
    /// s = offset + sign·x[cone]
    Shifted { cone: usize, offset: f64, sign: f64 },
    /// s = x[plus] − x[minus]
    Split { plus: usize, minus: usize },
}

struct StandardForm {
    sizes: Vec<usize>,
    /// Per cone: (row, coefficient) pairs.
    cone_rows: Vec<Vec<(usize, RMatrix)>>,
    b: Vec<f64>,
    c: Vec<RMatrix>,
    /// Constant added to ⟨C,X⟩ to obtain the minimisation objective.
    c_offset: f64,
    scalar_maps: Vec<ScalarMap>,
    n_user_blocks: usize,
}

fn one(v: f64) -> RMatrix {
    RMatrix::from_diag(&[v])
}

fn to_standard_form(p: &SdpProblem) -> StandardForm {
    let mut sizes: Vec<usize> = p.blocks.iter().map(|b| b.size).collect();
    let n_user_blocks = sizes.len();
    let mut scalar_maps = Vec::with_capacity(p.scalars.len());
    let mut extra_rows: Vec<(usize, f64)> = Vec::new(); // (slack-row pair cone, upper - lower)
    let mut slack_of = Vec::new();
    for s in &p.scalars {
        match (s.lower, s.upper) {
            (Some(l), u) => {
                let cone = sizes.len();
                sizes.push(1);
                scalar_maps.push(ScalarMap::Shifted {
                    cone,
                    offset: l,
                    sign: 1.0,
                });
                if let Some(u) = u {
                    let slack = sizes.len();
                    sizes.push(1);
                    extra_rows.push((cone, u - l));
                    slack_of.push(slack);
                }
            }
            (None, Some(u)) => {
                let cone = sizes.len();
                sizes.push(1);
                scalar_maps.push(ScalarMap::Shifted {
                    cone,
                    offset: u,
                    sign: -1.0,
                });
            }
            (None, None) => {
                let plus = sizes.len();
                sizes.push(1);
                let minus = sizes.len();
                sizes.push(1);
                scalar_maps.push(ScalarMap::Split { plus, minus });
            }
        }
    }
    let mut cone_rows: Vec<Vec<(usize, RMatrix)>> = vec![Vec::new(); sizes.len()];
    let mut c: Vec<RMatrix> = sizes.iter().map(|&n| RMatrix::zeros(n, n)).collect();
    let mut b = Vec::with_capacity(p.constraints.len() + extra_rows.len());

    for (row, con) in p.constraints.iter().enumerate() {
        let mut rhs = con.rhs;
        for (id, g) in &con.form.blocks {
            cone_rows[id.0].push((row, g.clone()));
        }
        for (id, g) in &con.form.scalars {
            rhs -= place_scalar(&scalar_maps, Some(row), id.0, *g, &mut cone_rows, &mut c);
        }
        b.push(rhs);
    }
    for (k, &(cone, width)) in extra_rows.iter().enumerate() {
        let row = b.len();
        cone_rows[cone].push((row, one(1.0)));
        cone_rows[slack_of[k]].push((row, one(1.0)));
        b.push(width);
    }
    // Objective: maximise f ⇒ minimise −f.
    let mut c_offset = 0.0;
    for (id, g) in &p.objective.blocks {
        c[id.0] = &c[id.0] - g;
    }
    for (id, g) in &p.objective.scalars {
        c_offset += place_scalar(&scalar_maps, None, id.0, -*g, &mut cone_rows, &mut c);
    }
    // Merge duplicate (row) entries per cone so the Schur assembly sees one
    // coefficient per row and cone.
    for rows in cone_rows.iter_mut() {
        rows.sort_by_key(|(r, _)| *r);
        let mut merged: Vec<(usize, RMatrix)> = Vec::with_capacity(rows.len());
        for (r, g) in rows.drain(..) {
            match merged.last_mut() {
                Some((lr, lg)) if *lr == r => *lg += &g,
                _ => merged.push((r, g)),
            }
        }
        *rows = merged;
    }
    StandardForm {
        sizes,
        cone_rows,
        b,
        c,
        c_offset,
        scalar_maps,
        n_user_blocks,
    }
}

/// Places coefficient `g` on original scalar `j` into `row` (or into the
/// cost when `row` is `None`) and returns the constant g·offset it implies.
fn place_scalar(
    maps: &[ScalarMap],
    row: Option<usize>,
    j: usize,
    g: f64,
    cone_rows: &mut [Vec<(usize, RMatrix)>],
    c: &mut [RMatrix],
) -> f64 {
    let mut put = |cone: usize, v: f64| match row {
        Some(r) => cone_rows[cone].push((r, one(v))),
        None => c[cone][(0, 0)] += v,
    };
    match maps[j] {
        ScalarMap::Shifted { cone, offset, sign } => {
            put(cone, g * sign);
            g * offset
        }
        ScalarMap::Split { plus, minus } => {
            put(plus, g);
            put(minus, -g);
            0.0
        }
    }
}

impl StandardForm {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn apply(&self, x: &[RMatrix]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for (k, rows) in self.cone_rows.iter().enumerate() {
            for (r, g) in rows {
                out[*r] += g.dot(&x[k]);
            }
        }
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<RMatrix> {
        self.sizes
            .iter()
            .zip(&self.cone_rows)
            .map(|(&n, rows)| {
                let mut s = RMatrix::zeros(n, n);
                for (r, g) in rows {
                    if y[*r] != 0.0 {
                        s.axpy(y[*r], g);
                    }
                }
                s
            })
            .collect()
    }

    /// Removes linearly dependent rows. Returns the kept row indices, or
    /// `None` if a dependent row has an inconsistent right-hand side.
    fn presolve(&self) -> Option<Vec<usize>> {
        let m = self.m();
        let mut gram = RMatrix::zeros(m, m);
        for rows in &self.cone_rows {
            for (i, (ri, gi)) in rows.iter().enumerate() {
                for (rj, gj) in &rows[i..] {
                    let v = gi.dot(gj);
                    gram[(*ri, *rj)] += v;
                    if ri != rj {
                        gram[(*rj, *ri)] += v;
                    }
                }
            }
        }
        // Gram-Schmidt in coefficient space: q_k = Σ_j coef[k][j]·row_j.
        let mut kept = Vec::new();
        let mut coefs: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut q_rhs: Vec<f64> = Vec::new();
        let bnorm = self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..m {
            let proj: Vec<f64> = coefs
                .iter()
                .map(|cf| cf.iter().map(|&(j, w)| w * gram[(j, i)]).sum())
                .collect();
            let res2 = gram[(i, i)] - proj.iter().map(|p| p * p).sum::<f64>();
            if gram[(i, i)] == 0.0 || res2 <= DEPENDENT_ROW_TOL * gram[(i, i)] {
                let implied: f64 = proj.iter().zip(&q_rhs).map(|(p, r)| p * r).sum();
                if (self.b[i] - implied).abs() > 1e-8 * (1.0 + bnorm) {
                    return None;
                }
                continue;
            }
            let norm = res2.sqrt();
            let mut cf: Vec<(usize, f64)> = vec![(i, 1.0 / norm)];
            let mut rhs = self.b[i] / norm;
            for (k, p) in proj.iter().enumerate() {
                for &(j, w) in &coefs[k] {
                    cf.push((j, -p * w / norm));
                }
                rhs -= p * q_rhs[k] / norm;
            }
            // Compact duplicate indices.
            cf.sort_by_key(|e| e.0);
            let mut compact: Vec<(usize, f64)> = Vec::with_capacity(cf.len());
            for (j, w) in cf {
                match compact.last_mut() {
                    Some((lj, lw)) if *lj == j => *lw += w,
                    _ => compact.push((j, w)),
                }
            }
            coefs.push(compact);
            q_rhs.push(rhs);
            kept.push(i);
        }
        Some(kept)
    }

    fn restrict_rows(&mut self, kept: &[usize]) {
        let mut new_index = vec![usize::MAX; self.m()];
        for (n, &k) in kept.iter().enumerate() {
            new_index[k] = n;
        }
        for rows in self.cone_rows.iter_mut() {
            rows.retain(|(r, _)| new_index[*r] != usize::MAX);
            for (r, _) in rows.iter_mut() {
                *r = new_index[*r];
            }
        }
        self.b = kept.iter().map(|&k| self.b[k]).collect();
    }

    fn recover(&self, x: &[RMatrix]) -> (Vec<RMatrix>, Vec<f64>) {
        let blocks = x[..self.n_user_blocks].to_vec();
        let scalars = self
            .scalar_maps
            .iter()
            .map(|m| match *m {
                ScalarMap::Shifted { cone, offset, sign } => offset + sign * x[cone][(0, 0)],
                ScalarMap::Split { plus, minus } => x[plus][(0, 0)] - x[minus][(0, 0)],
            })
            .collect();
        (blocks, scalars)
    }
}

fn dot_all(a: &[RMatrix], b: &[RMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn max_abs_all(a: &[RMatrix]) -> f64 {
    a.iter().map(|m| m.max_abs()).fold(0.0, f64::max)
}

fn vec_max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// NT scaling of one block: G with G·Gᵀ = W, W·Z·W = X, and
/// G⁻¹ X G⁻ᵀ = Gᵀ Z G = diag(λ).
struct Scaling {
    g: RMatrix,
    g_inv: RMatrix,
    lambda: Vec<f64>,
    w: RMatrix,
}

fn nt_scaling(x: &RMatrix, z: &RMatrix) -> Option<Scaling> {
    let lx = x.cholesky().ok()?;
    let lz = z.cholesky().ok()?;
    let (u, s, v) = (&lz.transpose() * &lx).svd();
    if s.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let n = s.len();
    let inv_sqrt: Vec<f64> = s.iter().map(|v| 1.0 / v.sqrt()).collect();
    // G = L_x V Λ^{-1/2},  G⁻¹ = Λ^{-1/2} Uᵀ L_zᵀ.
    let lxv = &lx * &v;
    let g = RMatrix::from_fn(n, n, |r, c| lxv[(r, c)] * inv_sqrt[c]);
    let ut_lzt = &u.transpose() * &lz.transpose();
    let g_inv = RMatrix::from_fn(n, n, |r, c| ut_lzt[(r, c)] * inv_sqrt[r]);
    let w = (&g * &g.transpose()).symmetrize();
    Some(Scaling { g, g_inv, lambda: s, w })
}

/// Largest step α ≤ 1 with λ + α·D ⪰ 0 damped by the fraction-to-boundary
/// rule, where D is a direction already in the scaled frame.
fn step_length(lambda: &[f64], d: &RMatrix) -> f64 {
    let n = lambda.len();
    let scaled = RMatrix::from_fn(n, n, |r, c| d[(r, c)] / (lambda[r] * lambda[c]).sqrt());
    let min = scaled.min_sym_eig();
    if min >= 0.0 {
        1.0
    } else {
        (STEP_FRACTION * (-1.0 / min)).min(1.0)
    }
}

/// Schur system M·Δy = r with M = B·Bᵀ, where row i of B stacks
/// svec(Gᵀ A_ik G) over the cones. Factoring Bᵀ by Householder QR gives
/// M = RᵀR without forming M, so the condition number is not squared.
struct SchurFactor {
    /// Bᵀ stored by column: one vector of length N per constraint row.
    b_cols: Vec<Vec<f64>>,
    /// Upper-triangular factor, row-major m×m.
    r: RMatrix,
    /// Pivots treated as zero; the matching Δy components are pinned to 0.
    skipped: Vec<bool>,
}

/// Relative size below which an R pivot counts as a lost direction.
const PIVOT_FLOOR: f64 = 1e-13;

impl SchurFactor {
    fn new(b_cols: Vec<Vec<f64>>) -> Option<Self> {
        let m = b_cols.len();
        let mut work = b_cols.clone();
        let mut r = RMatrix::zeros(m, m);
        for j in 0..m {
            let (head, tail) = work.split_at_mut(j + 1);
            let col = &mut head[j];
            let norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return None;
            }
            if norm == 0.0 {
                for (l, other) in tail.iter().enumerate() {
                    r[(j, j + 1 + l)] = other[j];
                }
                continue;
            }
            let alpha = if col[j] > 0.0 { -norm } else { norm };
            // v = x − α e₁ stored in place.
            col[j] -= alpha;
            let vnorm2: f64 = col[j..].iter().map(|v| v * v).sum();
            r[(j, j)] = alpha;
            for (l, other) in tail.iter_mut().enumerate() {
                if vnorm2 > 0.0 {
                    let dot: f64 = col[j..].iter().zip(&other[j..]).map(|(a, b)| a * b).sum();
                    let f = 2.0 * dot / vnorm2;
                    for (o, v) in other[j..].iter_mut().zip(&col[j..]) {
                        *o -= f * v;
                    }
                }
                r[(j, j + 1 + l)] = other[j];
            }
        }
        let max_diag = (0..m).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let skipped = (0..m).map(|i| !(r[(i, i)].abs() > PIVOT_FLOOR * max_diag)).collect();
        Some(Self { b_cols, r, skipped })
    }

    fn solve_once(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        // Rᵀ w = rhs.
        let mut w = vec![0.0; m];
        for i in 0..m {
            if self.skipped[i] {
                continue;
            }
            let mut s = rhs[i];
            for k in 0..i {
                s -= self.r[(k, i)] * w[k];
            }
            w[i] = s / self.r[(i, i)];
        }
        // R x = w.
        let mut x = vec![0.0; m];
        for i in (0..m).rev() {
            if self.skipped[i] {
                continue;
            }
            let mut s = w[i];
            for k in i + 1..m {
                s -= self.r[(i, k)] * x[k];
            }
            x[i] = s / self.r[(i, i)];
        }
        x
    }

    /// M·x computed as B(Bᵀx).
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.b_cols.first().map_or(0, Vec::len);
        let mut bt_x = vec![0.0; n];
        for (col, xi) in self.b_cols.iter().zip(x) {
            for (t, v) in bt_x.iter_mut().zip(col) {
                *t += v * xi;
            }
        }
        self.b_cols
            .iter()
            .map(|col| col.iter().zip(&bt_x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Solve followed by refinement rounds that are kept only while they
    /// reduce the residual.
    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let residual = |x: &[f64]| -> Vec<f64> { rhs.iter().zip(self.apply(x)).map(|(b, v)| b - v).collect() };
        let norm = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut x = self.solve_once(rhs);
        let mut res = residual(&x);
        for _ in 0..2 {
            let dx = self.solve_once(&res);
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let trial_res = residual(&trial);
            if norm(&trial_res) < norm(&res) {
                x = trial;
                res = trial_res;
            } else {
                break;
            }
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}

/// Symmetric vectorisation with √2 on off-diagonal entries, so that
/// svec(A)·svec(B) = ⟨A, B⟩.
fn svec_into(a: &RMatrix, out: &mut Vec<f64>) {
    let n = a.rows();
    for r in 0..n {
        out.push(a[(r, r)]);
        for c in r + 1..n {
            out.push(std::f64::consts::SQRT_2 * 0.5 * (a[(r, c)] + a[(c, r)]));
        }
    }
}

pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> SdpSolution {
    let mut sf = to_standard_form(problem);
    let n_total: usize = sf.sizes.iter().sum();
    let empty = |status: SdpStatus, sf: &StandardForm| {
        let x: Vec<RMatrix> = sf.sizes.iter().map(|&n| RMatrix::zeros(n, n)).collect();
        let (blocks, scalars) = sf.recover(&x);
        let max_residual = problem.max_residual(&blocks, &scalars);
        SdpSolution {
            status,
            blocks,
            scalars,
            objective: f64::NAN,
            dual_objective: f64::NAN,
            duality_gap: f64::NAN,
            max_residual,
            min_eigenvalue: 0.0,
            iterations: 0,
            history: Vec::new(),
        }
    };
    if problem.validate().is_err() {
        return empty(SdpStatus::NumericalFailure, &sf);
    }
    match sf.presolve() {
        Some(kept) => sf.restrict_rows(&kept),
        None => return empty(SdpStatus::PrimalInfeasible, &sf),
    }
    let m = sf.m();
    let b_norm = vec_max_abs(&sf.b);
    let c_norm = max_abs_all(&sf.c);
    let start = 1.0 + b_norm.max(c_norm);
    let mut x: Vec<RMatrix> = sf.sizes.iter().map(|&n| RMatrix::identity(n).scale(start)).collect();
    let mut z = x.clone();
    let mut y = vec![0.0; m];
    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        let ax = sf.apply(&x);
        let r_p: Vec<f64> = sf.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = sf.adjoint(&y);
        let r_d: Vec<RMatrix> = (0..sf.sizes.len()).map(|k| &(&sf.c[k] - &z[k]) - &aty[k]).collect();
        let pobj = dot_all(&sf.c, &x) + sf.c_offset;
        let dobj: f64 = sf.b.iter().zip(&y).map(|(b, y)| b * y).sum::<f64>() + sf.c_offset;
        let xz = dot_all(&x, &z);
        let mu = xz / n_total as f64;
        let pres = vec_max_abs(&r_p);
        let dres = max_abs_all(&r_d);
        history.push(IterateInfo {
            iteration: iter,
            primal_objective: -pobj,
            dual_objective: -dobj,
            primal_residual: pres,
            dual_residual: dres,
            mu,
        });
        iterations = iter;

        let gap = (pobj - dobj).abs();
        let scale = 1.0f64.max(pobj.abs().min(dobj.abs()));
        if pres <= opts.feas_tol
            && dres <= opts.feas_tol * (1.0 + c_norm)
            && gap <= opts.gap_tol * scale
            && xz <= opts.gap_tol * scale
        {
            status = SdpStatus::Optimal;
            break;
        }
        // Improving rays: a dual ray proves primal infeasibility, a primal
        // ray proves dual infeasibility.
        let by: f64 = sf.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        if by > 0.0 {
            let ray: f64 = (0..sf.sizes.len())
                .map(|k| (&aty[k] + &z[k]).frobenius_norm())
                .fold(0.0, f64::max);
            if ray <= INFEASIBILITY_RAY_TOL * by && by > 1e6 * (1.0 + c_norm) {
                status = SdpStatus::PrimalInfeasible;
                break;
            }
        }
        let cx = dot_all(&sf.c, &x);
        if cx < 0.0 && vec_max_abs(&ax) <= INFEASIBILITY_RAY_TOL * -cx && -cx > 1e6 * (1.0 + b_norm) {
            status = SdpStatus::DualInfeasible;
            break;
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(scalings) = x
            .iter()
            .zip(&z)
            .map(|(xk, zk)| nt_scaling(xk, zk))
            .collect::<Option<Vec<_>>>()
        else {
            status = SdpStatus::NumericalFailure;
            break;
        };

        // Schur complement M = B·Bᵀ with B_i = ⊕_k svec(G_kᵀ A_ik G_k).
        let mut b_cols: Vec<Vec<f64>> = vec![Vec::new(); m];
        for (k, rows) in sf.cone_rows.iter().enumerate() {
            let n = sf.sizes[k];
            let width = n * (n + 1) / 2;
            let mut present = vec![false; m];
            let gt = scalings[k].g.transpose();
            for (ri, gi) in rows {
                let t = gt.congruence(gi);
                let before = b_cols[*ri].len();
                // Rows may carry several terms on one cone: accumulate.
                let mut v = Vec::with_capacity(width);
                svec_into(&t, &mut v);
                if present[*ri] {
                    let start = before - width;
                    for (dst, src) in b_cols[*ri][start..].iter_mut().zip(&v) {
                        *dst += src;
                    }
                } else {
                    b_cols[*ri].extend(v);
                    present[*ri] = true;
                }
            }
            for (ri, col) in b_cols.iter_mut().enumerate() {
                if !present[ri] {
                    col.extend(std::iter::repeat_n(0.0, width));
                }
            }
        }
        let Some(factor) = SchurFactor::new(b_cols) else {
            status = SdpStatus::NumericalFailure;
            break;
        };

        let wrdw: Vec<RMatrix> = (0..sf.sizes.len())
            .map(|k| &(&scalings[k].w * &r_d[k]) * &scalings[k].w)
            .collect();
        let a_wrdw = sf.apply(&wrdw);

        // Direction for a given scaled complementarity target K (per block):
        // ΔX + W ΔZ W = G K Gᵀ, ΔZ = R_d − Aᵀ Δy, A(ΔX) = r_p.
        let direction = |k_targets: &[RMatrix]| -> Option<(Vec<RMatrix>, Vec<f64>, Vec<RMatrix>)> {
            let q: Vec<RMatrix> = scalings
                .iter()
                .zip(k_targets)
                .map(|(s, kt)| s.g.congruence(kt))
                .collect();
            let aq = sf.apply(&q);
            let rhs: Vec<f64> = (0..m).map(|i| r_p[i] - aq[i] + a_wrdw[i]).collect();
            let dy = factor.solve(&rhs)?;
            if dy.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let atdy = sf.adjoint(&dy);
            let dz: Vec<RMatrix> = (0..sf.sizes.len()).map(|k| (&r_d[k] - &atdy[k]).symmetrize()).collect();
            let dx: Vec<RMatrix> = (0..sf.sizes.len())
                .map(|k| (&q[k] - &(&(&scalings[k].w * &dz[k]) * &scalings[k].w)).symmetrize())
                .collect();
            Some((dx, dy, dz))
        };
        let scaled_dirs = |dx: &[RMatrix], dz: &[RMatrix]| -> (Vec<RMatrix>, Vec<RMatrix>) {
            let sx = scalings.iter().zip(dx).map(|(s, d)| s.g_inv.congruence(d)).collect();
            let sz = scalings
                .iter()
                .zip(dz)
                .map(|(s, d)| s.g.transpose().congruence(d))
                .collect();
            (sx, sz)
        };
        let steps = |sx: &[RMatrix], sz: &[RMatrix]| -> (f64, f64) {
            let ap = scalings
                .iter()
                .zip(sx)
                .map(|(s, d)| step_length(&s.lambda, d))
                .fold(1.0, f64::min);
            let ad = scalings
                .iter()
                .zip(sz)
                .map(|(s, d)| step_length(&s.lambda, d))
                .fold(1.0, f64::min);
            (ap, ad)
        };

        // Predictor: K = λ⧵(−λ∘λ) = −λ.
        let k_aff: Vec<RMatrix> = scalings
            .iter()
            .map(|s| RMatrix::from_diag(&s.lambda.iter().map(|l| -l).collect::<Vec<_>>()))
            .collect();
        let Some((dx_a, _, dz_a)) = direction(&k_aff) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let (sx_a, sz_a) = scaled_dirs(&dx_a, &dz_a);
        let (ap_a, ad_a) = steps(&sx_a, &sz_a);
        let mut gap_aff = 0.0;
        for k in 0..x.len() {
            let mut xa = x[k].clone();
            xa.axpy(ap_a, &dx_a[k]);
            let mut za = z[k].clone();
            za.axpy(ad_a, &dz_a[k]);
            gap_aff += xa.dot(&za);
        }
        let sigma = if xz > 0.0 {
            (gap_aff / xz).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector: r_c = −λ∘λ − ΔX̃_a∘ΔZ̃_a + σμI, K = λ⧵r_c.
        let k_cor: Vec<RMatrix> = scalings
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let n = s.lambda.len();
                let prod = &sx_a[k] * &sz_a[k];
                let rc = RMatrix::from_fn(n, n, |r, c| {
                    let jordan = 0.5 * (prod[(r, c)] + prod[(c, r)]);
                    let base = if r == c {
                        -s.lambda[r] * s.lambda[r] + sigma * mu
                    } else {
                        0.0
                    };
                    base - jordan
                });
                RMatrix::from_fn(n, n, |r, c| 2.0 * rc[(r, c)] / (s.lambda[r] + s.lambda[c]))
            })
            .collect();
        let Some((dx, dy, dz)) = direction(&k_cor) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let (sx, sz) = scaled_dirs(&dx, &dz);
        let (ap, ad) = steps(&sx, &sz);
        for k in 0..x.len() {
            x[k].axpy(ap, &dx[k]);
            x[k] = x[k].symmetrize();
            z[k].axpy(ad, &dz[k]);
            z[k] = z[k].symmetrize();
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
        if x.iter()
            .chain(&z)
            .any(|mtx| mtx.as_slice().iter().any(|v| !v.is_finite()))
        {
            status = SdpStatus::NumericalFailure;
            break;
        }
    }

    let (blocks, scalars) = sf.recover(&x);
    let objective = problem.objective.evaluate(&blocks, &scalars);
    let last = history.last().copied();
    let dual_objective = last.map(|h| h.dual_objective).unwrap_or(f64::NAN);
    let max_residual = problem.max_residual(&blocks, &scalars);
    let min_eigenvalue = blocks.iter().map(|b| b.min_sym_eig()).fold(f64::INFINITY, f64::min);
    SdpSolution {
        status,
        objective,
        dual_objective,
        duality_gap: (objective - dual_objective).abs(),
        max_residual,
        min_eigenvalue: if blocks.is_empty() { 0.0 } else { min_eigenvalue },
        blocks,
        scalars,
        iterations,
        history,
    }
}
