//! Real dense matrices for the interior-point solver.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub, SubAssign};

use super::{MatError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), cols, |r, c| rows[r][c])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Adds `s * other` in place.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product ⟨A, B⟩ = Σ A_ij B_ij.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// (M + Mᵀ)/2.
    pub fn symmetrize(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| 0.5 * (self[(r, c)] + self[(c, r)]))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (r + 1..self.cols).all(|c| (self[(r, c)] - self[(c, r)]).abs() <= tol))
    }

    /// A·B·Aᵀ.
    pub fn congruence(&self, b: &Self) -> Self {
        &(self * b) * &self.transpose()
    }

    /// Lower-triangular Cholesky factor L with A = L·Lᵀ.
    pub fn cholesky(&self) -> Result<Self> {
        let n = self.rows;
        if n != self.cols {
            return Err(MatError::DimensionMismatch("cholesky of non-square matrix".into()));
        }
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(MatError::NotPsd { min_eig: d });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }

    /// Solves L·Lᵀ x = b given the Cholesky factor L.
    pub fn cholesky_solve(l: &Self, b: &[f64]) -> Vec<f64> {
        let n = l.rows;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_inverse(&self) -> Result<Self> {
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            if self[(j, j)] == 0.0 {
                return Err(MatError::Singular);
            }
            inv[(j, j)] = 1.0 / self[(j, j)];
            for i in j + 1..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= self[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = s / self[(i, i)];
            }
        }
        Ok(inv)
    }

    /// Solves A x = b by Gaussian elimination with partial pivoting.
    pub fn lu_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.rows;
        if n != self.cols || b.len() != n {
            return Err(MatError::DimensionMismatch("lu_solve shape".into()));
        }
        let mut a = self.clone();
        let mut x = b.to_vec();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (piv, pmax) =
                (k..n)
                    .map(|i| (i, a[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= 1e-14 * scale {
                return Err(MatError::Singular);
            }
            if piv != k {
                for c in 0..n {
                    a.data.swap(k * n + c, piv * n + c);
                }
                x.swap(k, piv);
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                if f == 0.0 {
                    continue;
                }
                for c in k..n {
                    let v = a[(k, c)];
                    a[(i, c)] -= f * v;
                }
                x[i] -= f * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for c in i + 1..n {
                s -= a[(i, c)] * x[c];
            }
            x[i] = s / a[(i, i)];
        }
        Ok(x)
    }

    /// Symmetric eigendecomposition by cyclic Jacobi. Eigenvalues ascending,
    /// eigenvectors in the columns of the returned matrix.
    pub fn sym_eig(&self) -> (Vec<f64>, Self) {
        let n = self.rows;
        let mut a = self.symmetrize();
        let mut v = Self::identity(n);
        let norm = a.frobenius_norm();
        if n > 1 && norm > 0.0 {
            for _ in 0..100 {
                let mut off = 0.0;
                for r in 0..n {
                    for c in 0..n {
                        if r != c {
                            off += a[(r, c)] * a[(r, c)];
                        }
                    }
                }
                if off.sqrt() <= 1e-15 * norm {
                    break;
                }
                for p in 0..n - 1 {
                    for q in p + 1..n {
                        let apq = a[(p, q)];
                        if apq.abs() <= 1e-300 || apq.abs() <= 1e-18 * norm {
                            continue;
                        }
                        let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                        let t = if theta >= 0.0 {
                            1.0 / (theta + (1.0 + theta * theta).sqrt())
                        } else {
                            -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                        };
                        let c = 1.0 / (1.0 + t * t).sqrt();
                        let s = t * c;
                        for k in 0..n {
                            let akp = a[(k, p)];
                            let akq = a[(k, q)];
                            a[(k, p)] = c * akp - s * akq;
                            a[(k, q)] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let apk = a[(p, k)];
                            let aqk = a[(q, k)];
                            a[(p, k)] = c * apk - s * aqk;
                            a[(q, k)] = s * apk + c * aqk;
                        }
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        for k in 0..n {
                            let vkp = v[(k, p)];
                            let vkq = v[(k, q)];
                            v[(k, p)] = c * vkp - s * vkq;
                            v[(k, q)] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let vals = order.iter().map(|&i| a[(i, i)]).collect();
        let vecs = Self::from_fn(n, n, |r, c| v[(r, order[c])]);
        (vals, vecs)
    }

    pub fn sym_eigvals(&self) -> Vec<f64> {
        self.sym_eig().0
    }

    pub fn min_sym_eig(&self) -> f64 {
        if self.rows == 1 {
            return self[(0, 0)];
        }
        self.sym_eigvals()[0]
    }

    /// Singular value decomposition of a square matrix by one-sided Jacobi:
    /// returns (U, σ, V) with A = U·diag(σ)·Vᵀ. Singular values are not sorted.
    pub fn svd(&self) -> (Self, Vec<f64>, Self) {
        let n = self.cols;
        let m = self.rows;
        let mut u = self.clone();
        let mut v = Self::identity(n);
        for _ in 0..60 {
            let mut rotated = false;
            for p in 0..n.saturating_sub(1) {
                for q in p + 1..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                    for i in 0..m {
                        let up = u[(i, p)];
                        let uq = u[(i, q)];
                        alpha += up * up;
                        beta += uq * uq;
                        gamma += up * uq;
                    }
                    if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m {
                        let up = u[(i, p)];
                        let uq = u[(i, q)];
                        u[(i, p)] = c * up - s * uq;
                        u[(i, q)] = s * up + c * uq;
                    }
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = c * vp - s * vq;
                        v[(i, q)] = s * vp + c * vq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sigma = vec![0.0; n];
        for (j, s) in sigma.iter_mut().enumerate() {
            let norm = (0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt();
            *s = norm;
            if norm > 0.0 {
                for i in 0..m {
                    u[(i, j)] /= norm;
                }
            }
        }
        (u, sigma, v)
    }
}

impl Index<(usize, usize)> for RMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &RMatrix {
    type Output = RMatrix;
    fn mul(self, rhs: &RMatrix) -> RMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = RMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
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

impl Add for &RMatrix {
    type Output = RMatrix;
    fn add(self, rhs: &RMatrix) -> RMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &RMatrix {
    type Output = RMatrix;
    fn sub(self, rhs: &RMatrix) -> RMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&RMatrix> for RMatrix {
    fn add_assign(&mut self, rhs: &RMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&RMatrix> for RMatrix {
    fn sub_assign(&mut self, rhs: &RMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RMatrix {
        RMatrix::from_rows(&[&[4.0, 1.0, 0.5], &[1.0, 3.0, -0.2], &[0.5, -0.2, 2.0]])
    }

    #[test]
    fn cholesky_roundtrip_and_solve() {
        let a = sample();
        let l = a.cholesky().unwrap();
        assert!((&l * &l.transpose()).max_abs_diff(&a) < 1e-14);
        let x = RMatrix::cholesky_solve(&l, &[1.0, 2.0, 3.0]);
        let y = a.lu_solve(&[1.0, 2.0, 3.0]).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
        let inv = l.lower_inverse().unwrap();
        assert!((&inv * &l).max_abs_diff(&RMatrix::identity(3)) < 1e-14);
        assert!(RMatrix::from_diag(&[1.0, -1.0]).cholesky().is_err());
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = sample();
        let (vals, vecs) = a.sym_eig();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let recon = &(&vecs * &RMatrix::from_diag(&vals)) * &vecs.transpose();
        assert!(recon.max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn svd_reconstructs() {
        let a = RMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, -1.0], &[3.0, 0.0, 1.0]]);
        let (u, s, v) = a.svd();
        let recon = &(&u * &RMatrix::from_diag(&s)) * &v.transpose();
        assert!(recon.max_abs_diff(&a) < 1e-13);
        assert!((&v.transpose() * &v).max_abs_diff(&RMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn lu_detects_singular() {
        let a = RMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(a.lu_solve(&[1.0, 1.0]).is_err());
    }
}
