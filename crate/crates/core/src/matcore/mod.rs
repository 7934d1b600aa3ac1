//! Dense complex linear algebra for the small operators used throughout the
//! toolkit (qubit states, effects, Choi matrices).
//!
//! Everything here works on row-major [`CMatrix`] values of side length up to a
//! few dozen. The Hermitian eigensolver is a cyclic Jacobi iteration, which is
//! unconditionally convergent and accurate to working precision at these
//! sizes.

pub mod real;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use real::RMatrix;

/// Tolerance used when deciding whether a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues above `-PSD_CLAMP` are treated as round-off and clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("matrix is singular")]
    Singular,
}

pub type Result<T> = std::result::Result<T, MatError>;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CMatrixJson", into = "CMatrixJson")]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// JSON form: shape plus row-major real and imaginary parts.
#[derive(Serialize, Deserialize)]
struct CMatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

impl TryFrom<CMatrixJson> for CMatrix {
    type Error = MatError;

    fn try_from(j: CMatrixJson) -> Result<Self> {
        let im = j.im.unwrap_or_else(|| vec![0.0; j.re.len()]);
        if im.len() != j.re.len() {
            return Err(MatError::DimensionMismatch("re and im lengths differ".into()));
        }
        let data = j.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        Self::from_vec(j.rows, j.cols, data)
    }
}

impl From<CMatrix> for CMatrixJson {
    fn from(m: CMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            re: m.data.iter().map(|z| z.re).collect(),
            im: Some(m.data.iter().map(|z| z.im).collect()),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Fails if the entry count does
    /// not match `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(MatError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    /// Projector |ψ⟩⟨ψ|.
    pub fn projector(psi: &[Complex64]) -> Self {
        Self::outer(psi, psi)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert–Schmidt inner product Tr(A† B).
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Tr(A·B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity, |M - M†|_max.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + adj[(r, c)]) * 0.5)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    /// Fallible product for callers that cannot guarantee shapes.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(MatError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self * other)
    }

    /// Kronecker product A ⊗ B.
    pub fn kron(&self, other: &Self) -> Self {
        let (rb, cb) = (other.rows, other.cols);
        Self::from_fn(self.rows * rb, self.cols * cb, |r, c| {
            self[(r / rb, c / cb)] * other[(r % rb, c % cb)]
        })
    }

    /// Conjugation U·M·U†.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Largest entrywise distance |A - B|_max. Infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(-1.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    let mut it = factors.iter();
    let first = match it.next() {
        Some(m) => (*m).clone(),
        None => return CMatrix::identity(1),
    };
    it.fold(first, |acc, m| acc.kron(m))
}

fn check_dims(m: &CMatrix, dims: &[usize]) -> Result<()> {
    if !m.is_square() {
        return Err(MatError::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != m.rows {
        return Err(MatError::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not multiply to {}",
            m.rows
        )));
    }
    Ok(())
}

fn split_index(mut idx: usize, dims: &[usize], digits: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        digits[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

/// Reduced operator on the subsystems listed in `keep` (in their original
/// order); all other subsystems are traced out.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(MatError::DimensionMismatch(format!(
            "keep set {keep:?} out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let tr_dim: usize = traced_dims.iter().product();

    let mut out = CMatrix::zeros(out_dim, out_dim);
    let mut full_r = vec![0usize; dims.len()];
    let mut full_c = vec![0usize; dims.len()];
    let mut kd_r = vec![0usize; kept.len()];
    let mut kd_c = vec![0usize; kept.len()];
    let mut td = vec![0usize; traced.len()];
    for r in 0..out_dim {
        split_index(r, &kept_dims, &mut kd_r);
        for c in 0..out_dim {
            split_index(c, &kept_dims, &mut kd_c);
            let mut acc = ZERO;
            for t in 0..tr_dim {
                split_index(t, &traced_dims, &mut td);
                for (slot, &k) in kept.iter().enumerate() {
                    full_r[k] = kd_r[slot];
                    full_c[k] = kd_c[slot];
                }
                for (slot, &k) in traced.iter().enumerate() {
                    full_r[k] = td[slot];
                    full_c[k] = td[slot];
                }
                acc += m[(join_index(&full_r, dims), join_index(&full_c, dims))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the indices of one subsystem, leaving the others untouched.
pub fn partial_transpose(m: &CMatrix, dims: &[usize], subsystem: usize) -> Result<CMatrix> {
    check_dims(m, dims)?;
    if subsystem >= dims.len() {
        return Err(MatError::DimensionMismatch(format!(
            "subsystem {subsystem} out of range for {} subsystems",
            dims.len()
        )));
    }
    let n = m.rows;
    let mut out = CMatrix::zeros(n, n);
    let mut dr = vec![0usize; dims.len()];
    let mut dc = vec![0usize; dims.len()];
    for r in 0..n {
        split_index(r, dims, &mut dr);
        for c in 0..n {
            split_index(c, dims, &mut dc);
            std::mem::swap(&mut dr[subsystem], &mut dc[subsystem]);
            out[(r, c)] = m[(join_index(&dr, dims), join_index(&dc, dims))];
            std::mem::swap(&mut dr[subsystem], &mut dc[subsystem]);
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matrix whose columns are the
/// corresponding orthonormal eigenvectors.
pub fn herm_eig(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let scale = h.max_abs().max(1.0);
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * scale {
        return Err(MatError::NotHermitian { deviation: dev });
    }
    Ok(jacobi_hermitian(&h.hermitian_part()))
}

/// Eigenvalues only, ascending.
pub fn herm_eigvals(h: &CMatrix) -> Result<Vec<f64>> {
    herm_eig(h).map(|(vals, _)| vals)
}

pub fn min_eigenvalue(h: &CMatrix) -> Result<f64> {
    herm_eigvals(h).map(|v| v[0])
}

fn jacobi_hermitian(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.rows;
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let norm = a.frobenius_norm();
    if n <= 1 || norm == 0.0 {
        return ((0..n).map(|i| a[(i, i)].re).collect(), v);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 || g <= 1e-18 * norm {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]] in the (p, q) plane.
                let gpp = Complex64::new(c, 0.0);
                let gpq = Complex64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                // A <- G† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn herm_fn(h: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (vals, vecs) = herm_eig(h)?;
    Ok(spectral(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>(), &vecs))
}

/// V·diag(λ)·V†.
pub fn spectral(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let n = vecs.rows;
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        for r in 0..n {
            let vr = vecs[(r, k)] * lam;
            for c in 0..n {
                out[(r, c)] += vr * vecs[(c, k)].conj();
            }
        }
    }
    out
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-PSD_CLAMP, 0)` are clamped to zero.
pub fn psd_sqrt(h: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = herm_eig(h)?;
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if vals[0] < -PSD_CLAMP * scale {
        return Err(MatError::NotPsd { min_eig: vals[0] });
    }
    let roots: Vec<f64> = vals.iter().map(|&x| x.max(0.0).sqrt()).collect();
    Ok(spectral(&roots, &vecs))
}

/// Real symmetric embedding of a Hermitian matrix H = A + iB as
/// `[[A, -B], [B, A]]`. Each eigenvalue of H appears twice in the result.
pub fn real_embed(h: &CMatrix) -> RMatrix {
    let n = h.rows;
    let mut out = RMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            out[(r, c)] = z.re;
            out[(r + n, c + n)] = z.re;
            out[(r, c + n)] = -z.im;
            out[(r + n, c)] = z.im;
        }
    }
    out
}

/// Inverse of [`real_embed`] that averages the two copies, so any real
/// symmetric 2n×2n matrix maps to a Hermitian n×n matrix. PSD inputs give PSD
/// outputs.
pub fn real_unembed(x: &RMatrix) -> CMatrix {
    let n = x.rows() / 2;
    CMatrix::from_fn(n, n, |r, c| {
        let re = 0.5 * (x[(r, c)] + x[(r + n, c + n)]);
        let im = 0.5 * (x[(r + n, c)] - x[(r, c + n)]);
        Complex64::new(re, im)
    })
}

/// Pauli matrices and friends.
pub mod pauli {
    use super::*;

    pub fn id2() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> CMatrix {
        CMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// [X, Y, Z].
    pub fn xyz() -> [CMatrix; 3] {
        [x(), y(), z()]
    }

    /// n·σ for a real 3-vector n.
    pub fn dot(n: [f64; 3]) -> CMatrix {
        let [px, py, pz] = xyz();
        let mut out = px.scale(n[0]);
        out += &py.scale(n[1]);
        out += &pz.scale(n[2]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn phi_plus() -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]
    }

    fn isotropic(alpha: f64) -> CMatrix {
        let mut w = CMatrix::projector(&phi_plus()).scale(alpha);
        w += &CMatrix::identity(4).scale((1.0 - alpha) / 4.0);
        w
    }

    #[test]
    fn kron_identity_and_paulis() {
        assert!(kron(&pauli::id2(), &pauli::id2()).approx_eq(&CMatrix::identity(4), 0.0));
        let zz = kron(&pauli::z(), &pauli::z());
        assert!(zz.approx_eq(&CMatrix::from_diag(&[1.0, -1.0, -1.0, 1.0]), 0.0));
        let xx = kron(&pauli::x(), &pauli::x());
        let out = xx.matvec(&phi_plus());
        for (a, b) in out.iter().zip(phi_plus()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn kron_index_formula() {
        let a = CMatrix::from_fn(2, 3, |r, k| c(r as f64 + 1.0, k as f64));
        let b = CMatrix::from_fn(3, 2, |r, k| c(k as f64 - 1.0, r as f64 * 0.5));
        let ab = kron(&a, &b);
        assert_eq!((ab.rows(), ab.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..2 {
                        assert_eq!(ab[(i * 3 + k, j * 2 + l)], a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let phi = CMatrix::projector(&phi_plus());
        let red = partial_trace(&phi, &[2, 2], &[1]).unwrap();
        assert!(red.approx_eq(&CMatrix::identity(2).scale(0.5), 1e-15));
        let red = partial_trace(&isotropic(0.5), &[2, 2], &[0]).unwrap();
        assert!(red.approx_eq(&CMatrix::identity(2).scale(0.5), 1e-15));

        let rho = CMatrix::from_vec(2, 2, vec![c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]).unwrap();
        let sigma = CMatrix::from_vec(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]).unwrap();
        let red = partial_trace(&kron(&rho, &sigma), &[2, 2], &[0]).unwrap();
        assert!(red.approx_eq(&rho.scale(3.0), 1e-14));
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = CMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 3], &[0]),
            Err(MatError::DimensionMismatch(_))
        ));
        assert!(partial_trace(&CMatrix::zeros(4, 2), &[2, 2], &[0]).is_err());
        assert!(partial_trace(&m, &[2, 2], &[5]).is_err());
    }

    #[test]
    fn partial_transpose_examples() {
        let phi = CMatrix::projector(&phi_plus());
        let pt = partial_transpose(&phi, &[2, 2], 1).unwrap();
        assert!((min_eigenvalue(&pt).unwrap() + 0.5).abs() < 1e-12);
        let pt = partial_transpose(&isotropic(1.0 / 3.0), &[2, 2], 1).unwrap();
        assert!(min_eigenvalue(&pt).unwrap().abs() < 1e-12);

        let rho = CMatrix::from_vec(2, 2, vec![c(0.6, 0.0), c(0.1, 0.3), c(0.1, -0.3), c(0.4, 0.0)]).unwrap();
        let sigma = pauli::y().scale(0.3);
        let pt = partial_transpose(&kron(&rho, &sigma), &[2, 2], 1).unwrap();
        assert!(pt.approx_eq(&kron(&rho, &sigma.transpose()), 1e-15));
        assert!(partial_transpose(&phi, &[2, 2], 2).is_err());
    }

    #[test]
    fn herm_eig_examples() {
        let (vals, _) = herm_eig(&pauli::z()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
        let (vals, vecs) = herm_eig(&pauli::x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Eigenvectors up to phase: |⟨v|(|0⟩∓|1⟩)/√2⟩| = 1.
        let minus = [c(s, 0.0), c(-s, 0.0)];
        let plus = [c(s, 0.0), c(s, 0.0)];
        let ov = |k: usize, w: &[Complex64; 2]| (vecs[(0, k)].conj() * w[0] + vecs[(1, k)].conj() * w[1]).norm();
        assert!((ov(0, &minus) - 1.0).abs() < 1e-14);
        assert!((ov(1, &plus) - 1.0).abs() < 1e-14);

        let alpha = 0.37;
        let vals = herm_eigvals(&isotropic(alpha)).unwrap();
        let lo = (1.0 - alpha) / 4.0;
        for v in &vals[..3] {
            assert!((v - lo).abs() < 1e-14);
        }
        assert!((vals[3] - (1.0 + 3.0 * alpha) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(herm_eig(&m), Err(MatError::NotHermitian { .. })));
    }

    #[test]
    fn psd_sqrt_examples() {
        assert!(psd_sqrt(&CMatrix::identity(4))
            .unwrap()
            .approx_eq(&CMatrix::identity(4), 1e-15));
        let r = psd_sqrt(&CMatrix::from_diag(&[4.0, 1.0])).unwrap();
        assert!(r.approx_eq(&CMatrix::from_diag(&[2.0, 1.0]), 1e-15));
        let w1 = isotropic(1.0);
        let r = psd_sqrt(&w1).unwrap();
        assert!((&r * &r).approx_eq(&w1, 1e-12));
        assert!(matches!(
            psd_sqrt(&CMatrix::from_diag(&[1.0, -1e-3])),
            Err(MatError::NotPsd { .. })
        ));
        // Round-off negatives are clamped.
        assert!(psd_sqrt(&CMatrix::from_diag(&[1.0, -1e-12])).is_ok());
    }

    #[test]
    fn real_embed_examples() {
        let e = real_embed(&pauli::y());
        let expect = RMatrix::from_rows(&[
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
        ]);
        assert!(e.max_abs_diff(&expect) == 0.0);
        let vals = e.sym_eigvals();
        assert!(vals
            .iter()
            .zip([-1.0, -1.0, 1.0, 1.0])
            .all(|(a, b)| (a - b).abs() < 1e-14));

        let d = real_embed(&CMatrix::from_diag(&[1.5, -2.0]));
        let expect = RMatrix::from_rows(&[
            &[1.5, 0.0, 0.0, 0.0],
            &[0.0, -2.0, 0.0, 0.0],
            &[0.0, 0.0, 1.5, 0.0],
            &[0.0, 0.0, 0.0, -2.0],
        ]);
        assert_eq!(d.max_abs_diff(&expect), 0.0);

        let vals = real_embed(&isotropic(0.5)).sym_eigvals();
        for v in &vals[..6] {
            assert!((v - 0.125).abs() < 1e-14);
        }
        assert!((vals[6] - 0.625).abs() < 1e-14 && (vals[7] - 0.625).abs() < 1e-14);
    }

    #[test]
    fn unembed_inverts_embed() {
        let h = CMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.2, -0.7), c(0.2, 0.7), c(-0.5, 0.0)]).unwrap();
        assert!(real_unembed(&real_embed(&h)).approx_eq(&h, 0.0));
    }
}
