//! Dense vectors, matrices and symmetric positive-definite factorizations.
//!
//! Everything here is small (dimension rarely above ten) and fixed to `f64`.
//! Eigendecompositions use cyclic Jacobi rotations so results are
//! bit-for-bit deterministic for identical inputs.

use std::fmt;
use std::ops::{Deref, DerefMut, Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Numerical tolerances shared by the whole crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum asymmetry `|m_ij - m_ji|` (relative to the largest entry) accepted as symmetric.
    pub symmetry: f64,
    /// Smallest eigenvalue accepted as strictly positive.
    pub min_eigenvalue: f64,
    /// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below this fraction of the total.
    pub jacobi_offdiag: f64,
    /// Primal feasibility tolerance of the simplex solver.
    pub lp_feasibility: f64,
    /// Smallest pivot magnitude the simplex solver will divide by.
    pub lp_pivot: f64,
    /// Relative duality-gap tolerance, applied as `tol * (1 + |value|)`.
    pub lp_duality_gap: f64,
    /// Tolerance for "constraint holds with equality" in association tests.
    pub association: f64,
    /// Membership tolerance of confidence regions.
    pub membership: f64,
}

pub const TOL: Tolerances = Tolerances {
    symmetry: 1e-12,
    min_eigenvalue: 1e-12,
    jacobi_offdiag: 1e-12,
    lp_feasibility: 1e-8,
    lp_pivot: 1e-10,
    lp_duality_gap: 1e-7,
    association: 1e-6,
    membership: 1e-9,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("non-finite entry encountered")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, NumericError>;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(NumericError::DimensionMismatch { expected, found })
    }
}

/// A real column vector.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Vector(s.to_vec())
    }

    /// The `j`-th standard basis vector.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[j] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

/// A dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = *e;
        }
        m
    }

    /// Builds a matrix from equally sized rows. An empty slice gives a `0 x cols` matrix.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    /// Appends a row; the first row pushed onto an empty `0 x 0` matrix fixes the width.
    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if self.rows == 0 && self.data.is_empty() && self.cols == 0 {
            self.cols = row.len();
        }
        check_dim(self.cols, row.len())?;
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.cols, x.dim())?;
        Ok(Vector(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|m_ij - m_ji|`; `+inf` for non-square matrices.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.max_abs().max(1.0)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

fn require_symmetric(m: &Matrix) -> Result<()> {
    if !m.is_finite() {
        return Err(NumericError::NonFinite);
    }
    if !m.is_symmetric(TOL.symmetry) {
        return Err(NumericError::NotSymmetric(m.asymmetry()));
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (in the order produced by the sweep, not sorted) and
/// the matrix whose columns are the matching orthonormal eigenvectors.
pub fn symmetric_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    require_symmetric(m)?;
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize exactly so rotations see a symmetric input
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let mut q = Matrix::identity(n);
    let total = a.frobenius();
    let threshold = TOL.jacobi_offdiag * total.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let arr = a[(r, r)];
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akr = a[(k, r)];
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let ark = a[(r, k)];
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                a[(p, r)] = 0.0;
                a[(r, p)] = 0.0;
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok((values, q))
}

/// `Q diag(f(values)) Q^T`.
fn spectral_map(values: &[f64], q: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let n = values.len();
    let mapped: Vec<f64> = values.iter().map(|&v| f(v)).collect();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| q[(i, k)] * mapped[k] * q[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

/// Symmetric square root of an SPD matrix together with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdFactorization {
    source: Matrix,
    sqrt: Matrix,
    inv_sqrt: Matrix,
    eigenvalues: Vec<f64>,
}

impl SpdFactorization {
    pub fn source(&self) -> &Matrix {
        &self.source
    }

    /// The symmetric PSD root `V^{1/2}`.
    pub fn sqrt(&self) -> &Matrix {
        &self.sqrt
    }

    /// `V^{-1/2}`.
    pub fn inv_sqrt(&self) -> &Matrix {
        &self.inv_sqrt
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn dim(&self) -> usize {
        self.source.rows()
    }

    /// `||x||_{V^{-1}} = ||V^{-1/2} x||_2`.
    pub fn inv_norm(&self, x: &Vector) -> Result<f64> {
        Ok(self.inv_sqrt.mul_vec(x)?.norm())
    }
}

pub fn spd_sqrt(m: &Matrix) -> Result<SpdFactorization> {
    let (values, q) = symmetric_eigen(m)?;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > TOL.min_eigenvalue) {
        return Err(NumericError::NotPositiveDefinite(min));
    }
    let sqrt = spectral_map(&values, &q, f64::sqrt);
    let inv_sqrt = spectral_map(&values, &q, |v| 1.0 / v.sqrt());
    Ok(SpdFactorization { source: m.clone(), sqrt, inv_sqrt, eigenvalues: values })
}

/// `v + x x^T`; symmetric by construction.
pub fn rank_one_update(v: &Matrix, x: &Vector) -> Result<Matrix> {
    check_dim(v.rows(), x.dim())?;
    check_dim(v.cols(), x.dim())?;
    let mut out = v.clone();
    let n = x.dim();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] += x[i] * x[j];
        }
    }
    Ok(out)
}

/// Lower-triangular Cholesky factor.
pub fn cholesky(m: &Matrix) -> Result<Matrix> {
    require_symmetric(m)?;
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > TOL.min_eigenvalue) {
            return Err(NumericError::NotPositiveDefinite(d));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// `sqrt(x^T m x)` for SPD `m`.
pub fn weighted_norm(x: &Vector, m: &Matrix) -> Result<f64> {
    check_dim(m.rows(), x.dim())?;
    let l = cholesky(m)?;
    // x^T L L^T x = ||L^T x||^2
    let n = x.dim();
    let mut acc = 0.0;
    for j in 0..n {
        let s: f64 = (j..n).map(|i| l[(i, j)] * x[i]).sum();
        acc += s * s;
    }
    Ok(acc.sqrt())
}

/// Solves `m x = b` for SPD `m` via Cholesky.
pub fn solve_spd(m: &Matrix, b: &Vector) -> Result<Vector> {
    check_dim(m.rows(), b.dim())?;
    let l = cholesky(m)?;
    let n = b.dim();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - s) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    Ok(Vector(x))
}

pub fn log_det(m: &Matrix) -> Result<f64> {
    let l = cholesky(m)?;
    Ok((0..m.rows()).map(|i| 2.0 * l[(i, i)].ln()).sum())
}

/// Solves a general square system with partial pivoting; `None` when singular.
pub fn solve_general(a: &Matrix, b: &Vector, pivot_tol: f64) -> Option<Vector> {
    let n = a.rows();
    if a.cols() != n || b.dim() != n {
        return None;
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag <= pivot_tol {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            rhs.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[(r, col)] / m[(col, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[(r, j)] -= f * m[(col, j)];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| m[(i, k)] * x[k]).sum();
        x[i] = (rhs[i] - s) / m[(i, i)];
    }
    Some(Vector(x))
}
