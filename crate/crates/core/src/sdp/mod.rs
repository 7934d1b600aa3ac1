//! Small dense semidefinite programs.
//!
//! A problem has real symmetric PSD blocks, bounded or free scalars, a linear
//! objective to maximise and affine equality constraints
//! Σ⟨G_k,i, X_i⟩ + Σ g_k,j s_j = h_k. Complex Hermitian variables are handled
//! through the real embedding H ↦ [[Re H, −Im H], [Im H, Re H]], with
//! coefficients halved so that ⟨½·embed(G), embed(H)⟩ = Re Tr(G H).

mod dump;
mod solver;
mod verify;

pub use dump::write_sparse;
pub use solver::solve;
pub use verify::{verify, VerifyReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::{real_embed, real_unembed, CMatrix, RMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, SdpError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScalarId(pub usize);

/// A complex Hermitian variable of side `dim`, stored as a real block of side
/// `2·dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HermitianBlock {
    pub block: BlockId,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpec {
    pub name: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Σ⟨G_i, X_i⟩ + Σ g_j s_j.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearForm {
    pub blocks: Vec<(BlockId, RMatrix)>,
    pub scalars: Vec<(ScalarId, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block(mut self, id: BlockId, g: RMatrix) -> Self {
        self.blocks.push((id, g));
        self
    }

    pub fn scalar(mut self, id: ScalarId, g: f64) -> Self {
        self.scalars.push((id, g));
        self
    }

    /// Adds Re Tr(G·H) for a Hermitian variable.
    pub fn hermitian(self, h: HermitianBlock, g: &CMatrix) -> Self {
        self.block(h.block, hermitian_coefficient(g))
    }

    pub fn evaluate(&self, blocks: &[RMatrix], scalars: &[f64]) -> f64 {
        self.blocks.iter().map(|(id, g)| g.dot(&blocks[id.0])).sum::<f64>()
            + self.scalars.iter().map(|(id, g)| g * scalars[id.0]).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub form: LinearForm,
    pub rhs: f64,
}

/// Maximise `objective` subject to the equality constraints and PSD blocks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    pub scalars: Vec<ScalarSpec>,
    pub objective: LinearForm,
    pub constraints: Vec<Constraint>,
}

/// Coefficient matrix such that ⟨coef, embed(H)⟩ = Re Tr(G·H).
pub fn hermitian_coefficient(g: &CMatrix) -> RMatrix {
    real_embed(&g.hermitian_part()).scale(0.5)
}

/// Orthonormal basis of d×d Hermitian matrices under ⟨A, B⟩ = Tr(AB):
/// diagonal units, then (E_ij + E_ji)/√2 and i(E_ij − E_ji)/√2 for i < j.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    use num_complex::Complex64;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        out.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = Complex64::new(s, 0.0);
            m[(j, i)] = Complex64::new(s, 0.0);
            out.push(m);
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = Complex64::new(0.0, -s);
            m[(j, i)] = Complex64::new(0.0, s);
            out.push(m);
        }
    }
    out
}

/// A linear term L(H) of a Hermitian matrix equation, mapping the variable
/// to a Hermitian matrix of the equation's size.
pub struct MapTerm<'a> {
    pub var: HermitianBlock,
    pub map: &'a dyn Fn(&CMatrix) -> CMatrix,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: impl Into<String>, size: usize) -> BlockId {
        self.blocks.push(BlockSpec {
            name: name.into(),
            size,
        });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_hermitian_block(&mut self, name: impl Into<String>, dim: usize) -> HermitianBlock {
        HermitianBlock {
            block: self.add_block(name, 2 * dim),
            dim,
        }
    }

    /// Scalar with optional bounds; `None` means unbounded on that side.
    pub fn add_scalar(&mut self, name: impl Into<String>, lower: Option<f64>, upper: Option<f64>) -> ScalarId {
        self.scalars.push(ScalarSpec {
            name: name.into(),
            lower,
            upper,
        });
        ScalarId(self.scalars.len() - 1)
    }

    pub fn set_objective(&mut self, form: LinearForm) {
        self.objective = form;
    }

    pub fn add_constraint(&mut self, label: impl Into<String>, form: LinearForm, rhs: f64) {
        self.constraints.push(Constraint {
            label: label.into(),
            form,
            rhs,
        });
    }

    /// Adds the Hermitian matrix equation Σ L_k(H_k) + Σ s_j·M_j = R as
    /// d² real equalities, one per element of [`hermitian_basis`].
    /// Each map must preserve Hermiticity.
    pub fn add_hermitian_equality(
        &mut self,
        label: &str,
        terms: &[MapTerm<'_>],
        scalar_terms: &[(ScalarId, CMatrix)],
        rhs: &CMatrix,
    ) {
        let d = rhs.rows();
        let out_basis = hermitian_basis(d);
        // Coefficient of output component m on variable k: Σ_n Tr(E_m L_k(F_n)) F_n.
        let images: Vec<(HermitianBlock, Vec<CMatrix>, Vec<CMatrix>)> = terms
            .iter()
            .map(|t| {
                let in_basis = hermitian_basis(t.var.dim);
                let imgs = in_basis.iter().map(|f| (t.map)(f)).collect();
                (t.var, in_basis, imgs)
            })
            .collect();
        for (m, e) in out_basis.iter().enumerate() {
            let mut form = LinearForm::new();
            for (var, in_basis, imgs) in &images {
                let mut g = CMatrix::zeros(var.dim, var.dim);
                for (f, img) in in_basis.iter().zip(imgs) {
                    let w = e.trace_product(img).re;
                    if w != 0.0 {
                        g += &f.scale(w);
                    }
                }
                if g.max_abs() > 0.0 {
                    form = form.hermitian(*var, &g);
                }
            }
            for (s, mat) in scalar_terms {
                let w = e.trace_product(mat).re;
                if w != 0.0 {
                    form = form.scalar(*s, w);
                }
            }
            self.add_constraint(format!("{label}[{m}]"), form, e.trace_product(rhs).re);
        }
    }

    /// Checks shapes, symmetry and identifiers.
    pub fn validate(&self) -> Result<()> {
        let check_form = |form: &LinearForm, what: &str| -> Result<()> {
            for (id, g) in &form.blocks {
                let spec = self
                    .blocks
                    .get(id.0)
                    .ok_or_else(|| SdpError::Malformed(format!("{what}: unknown block {}", id.0)))?;
                if g.rows() != spec.size || g.cols() != spec.size {
                    return Err(SdpError::Malformed(format!(
                        "{what}: coefficient for block {} is {}x{}, expected {}",
                        spec.name,
                        g.rows(),
                        g.cols(),
                        spec.size
                    )));
                }
                if !g.is_symmetric(1e-12 * (1.0 + g.max_abs())) {
                    return Err(SdpError::Malformed(format!(
                        "{what}: coefficient for block {} is not symmetric",
                        spec.name
                    )));
                }
            }
            for (id, g) in &form.scalars {
                if id.0 >= self.scalars.len() {
                    return Err(SdpError::Malformed(format!("{what}: unknown scalar {}", id.0)));
                }
                if !g.is_finite() {
                    return Err(SdpError::Malformed(format!("{what}: non-finite coefficient")));
                }
            }
            Ok(())
        };
        if self.blocks.iter().any(|b| b.size == 0) {
            return Err(SdpError::Malformed("empty block".into()));
        }
        for s in &self.scalars {
            if let (Some(l), Some(u)) = (s.lower, s.upper) {
                if l > u {
                    return Err(SdpError::Malformed(format!(
                        "scalar {} has lower {l} > upper {u}",
                        s.name
                    )));
                }
            }
        }
        check_form(&self.objective, "objective")?;
        for c in &self.constraints {
            check_form(&c.form, &c.label)?;
            if !c.rhs.is_finite() {
                return Err(SdpError::Malformed(format!("{}: non-finite right-hand side", c.label)));
            }
        }
        Ok(())
    }

    /// Largest absolute equality residual of a candidate point.
    pub fn max_residual(&self, blocks: &[RMatrix], scalars: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| (c.form.evaluate(blocks, scalars) - c.rhs).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_rhs(&self) -> f64 {
        self.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Diagnostics for one interior-point iterate, in the maximisation sense.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateInfo {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub blocks: Vec<RMatrix>,
    pub scalars: Vec<f64>,
    /// Primal objective (maximisation).
    pub objective: f64,
    /// Dual bound on the objective.
    pub dual_objective: f64,
    /// |objective − dual_objective|.
    pub duality_gap: f64,
    pub max_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub history: Vec<IterateInfo>,
}

impl SdpSolution {
    pub fn block(&self, id: BlockId) -> &RMatrix {
        &self.blocks[id.0]
    }

    pub fn scalar(&self, id: ScalarId) -> f64 {
        self.scalars[id.0]
    }

    pub fn hermitian(&self, h: HermitianBlock) -> CMatrix {
        real_unembed(&self.blocks[h.block.0])
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

#[cfg(test)]
mod tests;
