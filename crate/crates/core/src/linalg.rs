//! Dense complex matrices: Hermitian eigendecomposition, functions of PSD
//! matrices on their support, Kronecker products and subsystem bookkeeping.
//!
//! Subsystem index convention: for factor dimensions `[d0, d1, ..]` the linear
//! index of the basis vector `|x0 x1 ..>` is row-major, `x0` most significant.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{ensure_dim, Error, Result};
use crate::math;

pub type C64 = num_complex::Complex<f64>;

/// Largest matrix dimension handled by the eigensolver.
pub const MAX_DIM: usize = 64;

/// Default eigenvalue cut-off, relative to the largest eigenvalue magnitude.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Entrywise tolerance used for Hermitian checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_vec(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Row-major real matrix, convenient for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::outer2(v, v)
    }

    /// `|a><b|`.
    pub fn outer2(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    /// Single column matrix.
    pub fn column(v: &[C64]) -> Self {
        Self::from_vec(v.len(), 1, v.to_vec())
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_vec(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::from_vec(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^dag|` entrywise; `+inf` for non-square input.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// `(M + M^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Kronecker product, `a (x) b` with `a` the most significant factor.
    pub fn kron(&self, b: &Self) -> Self {
        let (ar, ac, br, bc) = (self.rows, self.cols, b.rows, b.cols);
        let mut out = Self::zeros(ar * br, ac * bc);
        let oc = ac * bc;
        for i in 0..ar {
            for j in 0..ac {
                let a = self.data[i * ac + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..br {
                    for l in 0..bc {
                        out.data[(i * br + k) * oc + j * bc + l] = a * b.data[k * bc + l];
                    }
                }
            }
        }
        out
    }

    /// Traces out every factor not listed in `keep`.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let n = self.check_factorization(dims)?;
        let keep_mask = subsystem_mask(dims.len(), keep)?;
        let kept_dims: Vec<usize> = (0..dims.len()).filter(|&k| keep_mask[k]).map(|k| dims[k]).collect();
        let traced_dims: Vec<usize> = (0..dims.len()).filter(|&k| !keep_mask[k]).map(|k| dims[k]).collect();
        let out_dim: usize = kept_dims.iter().product();

        let mut kept_idx = vec![0usize; n];
        let mut traced_idx = vec![0usize; n];
        let mut digits = vec![0usize; dims.len()];
        for i in 0..n {
            split_index(i, dims, &mut digits);
            let (mut ki, mut ti) = (0, 0);
            for (k, &x) in digits.iter().enumerate() {
                if keep_mask[k] {
                    ki = ki * dims[k] + x;
                } else {
                    ti = ti * dims[k] + x;
                }
            }
            kept_idx[i] = ki;
            traced_idx[i] = ti;
        }
        let _ = traced_dims;

        let mut out = Self::zeros(out_dim, out_dim);
        for i in 0..n {
            for j in 0..n {
                if traced_idx[i] == traced_idx[j] {
                    out.data[kept_idx[i] * out_dim + kept_idx[j]] += self.data[i * n + j];
                }
            }
        }
        Ok(out)
    }

    /// Reorders tensor factors: factor `k` of the result is factor `perm[k]` of
    /// `self`.
    pub fn permute_subsystems(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let n = self.check_factorization(dims)?;
        let target = permuted_indices(dims, perm)?;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[target[i] * n + target[j]] = self.data[i * n + j];
            }
        }
        Ok(out)
    }

    /// Transposes the listed factors.
    pub fn partial_transpose(&self, dims: &[usize], systems: &[usize]) -> Result<Self> {
        let n = self.check_factorization(dims)?;
        let mask = subsystem_mask(dims.len(), systems)?;
        let mut out = Self::zeros(n, n);
        let mut di = vec![0usize; dims.len()];
        let mut dj = vec![0usize; dims.len()];
        for i in 0..n {
            split_index(i, dims, &mut di);
            for j in 0..n {
                split_index(j, dims, &mut dj);
                let (mut ti, mut tj) = (0, 0);
                for k in 0..dims.len() {
                    let (a, b) = if mask[k] { (dj[k], di[k]) } else { (di[k], dj[k]) };
                    ti = ti * dims[k] + a;
                    tj = tj * dims[k] + b;
                }
                out.data[ti * n + tj] = self.data[i * n + j];
            }
        }
        Ok(out)
    }

    fn check_factorization(&self, dims: &[usize]) -> Result<usize> {
        let n: usize = dims.iter().product();
        ensure_dim(self.rows, self.cols)?;
        ensure_dim(self.rows, n)?;
        Ok(n)
    }

    pub fn hermitian_eig(&self) -> Result<EigenDecomposition> {
        hermitian_eig(self)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

fn subsystem_mask(count: usize, systems: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; count];
    for &k in systems {
        if k >= count {
            return Err(Error::DimensionMismatch { expected: count, got: k });
        }
        mask[k] = true;
    }
    Ok(mask)
}

fn split_index(mut idx: usize, dims: &[usize], digits: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        digits[k] = idx % dims[k];
        idx /= dims[k];
    }
}

/// For each linear index over `dims`, its position after reordering factors
/// by `perm`.
pub(crate) fn permuted_indices(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    ensure_dim(dims.len(), perm.len())?;
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::DimensionMismatch { expected: dims.len(), got: p });
        }
        seen[p] = true;
    }
    let n: usize = dims.iter().product();
    let mut digits = vec![0usize; dims.len()];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        split_index(i, dims, &mut digits);
        let mut t = 0;
        for &p in perm {
            t = t * dims[p] + digits[p];
        }
        out.push(t);
    }
    Ok(out)
}

/// Spectral decomposition `M = V diag(values) V^dag` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.col(k)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Absolute cut-off for "nonzero" eigenvalues given a relative tolerance.
    pub fn threshold(&self, tol: f64) -> f64 {
        tol * self.max_abs_value()
    }

    /// `V diag(f(lambda)) V^dag`.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let weights: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut out = CMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|v| v)
    }

    /// Fails with `NotPsd` when the smallest eigenvalue is below `-tol` relative.
    pub fn check_psd(&self, tol: f64) -> Result<()> {
        let min = self.values.first().copied().unwrap_or(0.0);
        if min < -self.threshold(tol) {
            Err(Error::NotPsd(min))
        } else {
            Ok(())
        }
    }

    /// Number of eigenvalues above the relative cut-off.
    pub fn rank(&self, tol: f64) -> usize {
        let thr = self.threshold(tol);
        self.values.iter().filter(|&&v| v > thr).count()
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues ascend. Each eigenvector is phase-fixed so its first nonzero
/// entry is real positive, and eigenvectors of (numerically) equal eigenvalues
/// are ordered lexicographically by their entries.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenDecomposition> {
    ensure_dim(m.rows, m.cols)?;
    let n = m.rows;
    if n > MAX_DIM {
        return Err(Error::TooLarge(n));
    }
    let norm = m.frobenius_norm();
    let resid = m.hermitian_residual();
    if resid > HERMITIAN_TOL * norm.max(1.0) {
        return Err(Error::NotHermitian(resid));
    }

    let mut a = m.hermitian_part().data;
    let mut v = CMatrix::identity(n).data;
    let stop = (1e-15 * norm) * (1e-15 * norm);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off <= stop || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let w = apq / mag;
                let wc = w.conj();
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * wc * s;
                    a[k * n + q] = akp * s + akq * wc * c;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * w * s;
                    a[q * n + k] = apk * s + aqk * w * c;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * wc * s;
                    v[k * n + q] = vkp * s + vkq * wc * c;
                }
            }
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut columns: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<C64> = (0..n).map(|i| v[i * n + k]).collect();
            fix_phase(&mut col);
            (raw[k], col)
        })
        .collect();
    columns.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Stable ordering inside degenerate clusters.
    let scale = raw.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && columns[end].0 - columns[end - 1].0 <= 1e-12 * scale {
            end += 1;
        }
        if end - start > 1 {
            columns[start..end].sort_by(|x, y| lexicographic(&x.1, &y.1));
        }
        start = end;
    }

    let values = columns.iter().map(|c| c.0).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| columns[k].1[i]);
    Ok(EigenDecomposition { values, vectors })
}

/// Multiplies `v` by a phase so its first entry with modulus above `1e-12` is
/// real positive.
pub fn fix_phase(v: &mut [C64]) {
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lexicographic(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            other => return other.reverse(),
        }
    }
    Ordering::Equal
}

/// Projector onto the span of eigenvectors with eigenvalue above `tol`
/// (relative to the largest eigenvalue).
pub fn support_projector(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    eig.check_psd(tol)?;
    let thr = eig.threshold(tol);
    Ok(eig.map(|v| if v > thr && v > 0.0 { 1.0 } else { 0.0 }))
}

/// `V diag(log2 lambda) V^dag` over the support; eigenvalues at or below the
/// cut-off map to zero.
pub fn matrix_log2_on_support(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    eig.check_psd(tol)?;
    let thr = eig.threshold(tol);
    Ok(eig.map(|v| if v > thr && v > 0.0 { math::log2(v) } else { 0.0 }))
}

/// Square root of a PSD matrix (negative noise clipped to zero).
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    eig.check_psd(SUPPORT_TOL)?;
    Ok(eig.map(|v| if v > 0.0 { math::sqrt(v) } else { 0.0 }))
}

/// Inverse square root on the support of a PSD matrix.
pub fn psd_inv_sqrt(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    eig.check_psd(tol)?;
    let thr = eig.threshold(tol);
    Ok(eig.map(|v| if v > thr && v > 0.0 { 1.0 / math::sqrt(v) } else { 0.0 }))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    m.partial_trace(dims, keep)
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    math::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// `<v| M |v>` (real part; `M` Hermitian).
pub(crate) fn expectation(m: &CMatrix, v: &[C64]) -> f64 {
    let n = v.len();
    let mut acc = ZERO;
    for i in 0..n {
        let mut row = ZERO;
        for j in 0..n {
            row += m.data[i * n + j] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_real_diag(&[1.0, -1.0])
    }

    #[test]
    fn identity_eigenvalues() {
        let e = hermitian_eig(&CMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let e = hermitian_eig(&CMatrix::from_real_diag(&[0.25, 0.25, 0.5, 0.0])).unwrap();
        assert_eq!(e.values, vec![0.0, 0.25, 0.25, 0.5]);
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        // |+> for +1 with positive first entry
        let v = e.vector(1);
        assert_abs_diff_eq!(v[0].re, core::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1].re, core::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = CMatrix::from_vec(
            3,
            3,
            vec![
                c(2.0, 0.0),
                c(0.5, -1.0),
                c(0.0, 0.3),
                c(0.5, 1.0),
                c(-1.0, 0.0),
                c(0.2, 0.2),
                c(0.0, -0.3),
                c(0.2, -0.2),
                c(0.7, 0.0),
            ],
        );
        let e = hermitian_eig(&m).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-13);
        let vtv = e.vectors.adjoint().matmul(&e.vectors);
        assert!(vtv.max_abs_diff(&CMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rejects_too_large() {
        assert!(matches!(hermitian_eig(&CMatrix::identity(65)), Err(Error::TooLarge(65))));
    }

    #[test]
    fn support_projector_of_choi_state() {
        let rho = CMatrix::from_real_diag(&[0.25, 0.0, 0.25, 0.5]);
        let p = support_projector(&rho, 1e-10).unwrap();
        assert!(p.max_abs_diff(&CMatrix::from_real_diag(&[1.0, 0.0, 1.0, 1.0])) < 1e-12);
    }

    #[test]
    fn support_projector_full_rank_and_pure() {
        let rho = CMatrix::from_real_diag(&[0.3, 0.7]);
        assert!(support_projector(&rho, 1e-10).unwrap().max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        let pure = CMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(support_projector(&pure, 1e-10).unwrap().max_abs_diff(&pure) < 1e-12);
    }

    #[test]
    fn support_projector_rejects_negative() {
        let m = CMatrix::from_real_diag(&[1.0, -0.1]);
        assert!(matches!(support_projector(&m, 1e-10), Err(Error::NotPsd(_))));
    }

    #[test]
    fn log2_on_support() {
        let l = matrix_log2_on_support(&CMatrix::from_real_diag(&[0.5, 0.5]), 1e-10).unwrap();
        assert!(l.max_abs_diff(&CMatrix::from_real_diag(&[-1.0, -1.0])) < 1e-14);
        let l = matrix_log2_on_support(&CMatrix::identity(3), 1e-10).unwrap();
        assert!(l.frobenius_norm() < 1e-14);
        let l = matrix_log2_on_support(&CMatrix::from_real_diag(&[0.25, 0.75]), 1e-10).unwrap();
        assert!(l.max_abs_diff(&CMatrix::from_real_diag(&[-2.0, libm::log2(0.75)])) < 1e-14);
        let l = matrix_log2_on_support(&CMatrix::from_real_diag(&[0.0, 1.0]), 1e-10).unwrap();
        assert!(l.frobenius_norm() < 1e-14);
    }

    #[test]
    fn kron_examples() {
        assert_eq!(CMatrix::identity(2).kron(&CMatrix::identity(2)), CMatrix::identity(4));
        let k0 = CMatrix::from_real_diag(&[1.0, 0.0]);
        let k1 = CMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(k0.kron(&k1), CMatrix::from_real_diag(&[0.0, 1.0, 0.0, 0.0]));
        assert_eq!(pauli_z().kron(&pauli_z()), CMatrix::from_real_diag(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn partial_trace_examples() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let phi = CMatrix::outer(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
        let red = phi.partial_trace(&[2, 2], &[0]).unwrap();
        assert!(red.max_abs_diff(&CMatrix::from_real_diag(&[0.5, 0.5])) < 1e-15);

        let all = phi.partial_trace(&[2, 2], &[]).unwrap();
        assert_eq!((all.rows(), all.cols()), (1, 1));
        assert_abs_diff_eq!(all[(0, 0)].re, 1.0, epsilon = 1e-15);

        let choi = CMatrix::from_real_diag(&[0.25, 0.0, 0.25, 0.5]);
        let tr_a = choi.partial_trace(&[2, 2], &[1]).unwrap();
        assert!(tr_a.max_abs_diff(&CMatrix::from_real_diag(&[0.5, 0.5])) < 1e-15);

        assert!(matches!(
            choi.partial_trace(&[2, 3], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn permute_and_partial_transpose() {
        let a = CMatrix::from_real_diag(&[1.0, 2.0]);
        let b = CMatrix::from_real_diag(&[3.0, 5.0, 7.0]);
        let ab = a.kron(&b);
        let ba = ab.permute_subsystems(&[2, 3], &[1, 0]).unwrap();
        assert_eq!(ba, b.kron(&a));

        // Partial transpose of |Phi+><Phi+| is SWAP/2.
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let phi = CMatrix::outer(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
        let pt = phi.partial_transpose(&[2, 2], &[1]).unwrap();
        let swap = CMatrix::from_real_rows(&[
            &[0.5, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.5, 0.0],
            &[0.0, 0.5, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.5],
        ]);
        assert!(pt.max_abs_diff(&swap) < 1e-15);
    }

    #[test]
    fn degenerate_ordering_is_deterministic() {
        let m = CMatrix::identity(3).scale_real(0.5);
        let e1 = hermitian_eig(&m).unwrap();
        let e2 = hermitian_eig(&m.clone()).unwrap();
        assert_eq!(e1, e2);
    }
}
