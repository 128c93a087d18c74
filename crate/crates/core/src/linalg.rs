//! Dense matrix storage plus the symmetric / PSD kernels used by the
//! Bures-Wasserstein formulas.
//!
//! Everything here is deliberately small-scale: covariance matrices in this
//! crate have dimension well below 64, so the eigensolver is a cyclic Jacobi
//! method with a fixed sweep budget. It is deterministic and accurate to a few
//! ulps on the matrices we care about.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sweep budget for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Relative PSD tolerance: eigenvalues down to `-PSD_REL_TOL * spectral_radius`
/// are treated as round-off and clamped to zero.
pub const PSD_REL_TOL: f64 = 1e-9;

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), m, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix::new(n, m, data)
    }

    pub fn row_vector(v: &[f64]) -> Self {
        Matrix::new(1, v.len(), v.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
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

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm(
            1.0,
            self,
            false,
            other,
            false,
            0.0,
            &mut out,
        );
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix::new(self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "sub shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix::new(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::new(self.rows, self.cols, self.data.iter().map(|a| a * s).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::new(self.rows, self.cols, self.data.iter().map(|&a| f(a)).collect())
    }

    pub fn add_assign_scaled(&mut self, other: &Matrix, s: f64) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrized(&self) -> Matrix {
        assert!(self.is_square(), "symmetrize requires a square matrix");
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `c ← alpha · op(a) · op(b) + beta · c`, where `op` optionally transposes.
pub fn gemm(
    alpha: f64,
    a: &Matrix,
    transpose_a: bool,
    b: &Matrix,
    transpose_b: bool,
    beta: f64,
    c: &mut Matrix,
) {
    let (m, k) = if transpose_a {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    let (kb, n) = if transpose_b {
        (b.cols, b.rows)
    } else {
        (b.rows, b.cols)
    };
    assert_eq!(k, kb, "gemm inner dimension mismatch");
    assert_eq!((c.rows, c.cols), (m, n), "gemm output shape mismatch");
    let (rsa, csa) = if transpose_a {
        (1, a.cols as isize)
    } else {
        (a.cols as isize, 1)
    };
    let (rsb, csb) = if transpose_b {
        (1, b.cols as isize)
    } else {
        (b.cols as isize, 1)
    };
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in c.data.iter_mut() {
            *v *= beta;
        }
        return;
    }
    // SAFETY: the pointers and strides describe the full extent of each
    // buffer, shapes were checked above, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
}

/// Symmetric matrix. Input is symmetrized on construction so that
/// `entries[i][j] == entries[j][i]` holds bit-exactly.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct SymMatrix(Matrix);

impl TryFrom<Matrix> for SymMatrix {
    type Error = Error;
    fn try_from(m: Matrix) -> Result<Self> {
        SymMatrix::new(m)
    }
}

impl From<SymMatrix> for Matrix {
    fn from(s: SymMatrix) -> Matrix {
        s.0
    }
}

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square and non-empty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(SymMatrix(m.symmetrized()))
    }

    /// Symmetrizes without validation. Panics on non-square input.
    pub fn from_matrix(m: &Matrix) -> Self {
        SymMatrix(m.symmetrized())
    }

    pub fn identity(d: usize) -> Self {
        SymMatrix(Matrix::identity(d))
    }

    pub fn zeros(d: usize) -> Self {
        SymMatrix(Matrix::zeros(d, d))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        SymMatrix(Matrix::from_diag(diag))
    }

    pub fn scaled_identity(d: usize, s: f64) -> Self {
        SymMatrix(Matrix::identity(d).scale(s))
    }

    /// Builds from a row-major lower triangle of length `d(d+1)/2`.
    pub fn from_lower(lower: &[f64]) -> Result<Self> {
        let d = dim_from_packed_len(lower.len()).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "{} is not a triangular number of entries",
                lower.len()
            ))
        })?;
        let mut m = Matrix::zeros(d, d);
        let mut k = 0;
        for i in 0..d {
            for j in 0..=i {
                m[(i, j)] = lower[k];
                m[(j, i)] = lower[k];
                k += 1;
            }
        }
        SymMatrix::new(m)
    }

    /// Row-major lower triangle, length `d(d+1)/2`.
    pub fn to_lower(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in 0..=i {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    #[inline]
    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.sub(&other.0))
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(self.0.scale(s))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// `A · self · A` for symmetric `A`, symmetrized to absorb round-off.
    pub fn congruence(&self, a: &SymMatrix) -> SymMatrix {
        SymMatrix::from_matrix(&a.0.matmul(&self.0).matmul(&a.0))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Inverts `n = d(d+1)/2`.
pub fn dim_from_packed_len(n: usize) -> Option<usize> {
    let d = ((((8 * n + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (d * (d + 1) / 2 == n && d > 0).then_some(d)
}

/// Symmetric positive semi-definite matrix.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "SymMatrix", into = "SymMatrix")]
pub struct PsdMatrix(SymMatrix);

impl TryFrom<SymMatrix> for PsdMatrix {
    type Error = Error;
    fn try_from(s: SymMatrix) -> Result<Self> {
        PsdMatrix::new(s)
    }
}

impl From<PsdMatrix> for SymMatrix {
    fn from(p: PsdMatrix) -> SymMatrix {
        p.0
    }
}

impl PsdMatrix {
    /// Validates that every eigenvalue is at least `-tol_psd`.
    pub fn new(s: SymMatrix) -> Result<Self> {
        let eig = sym_eig(&s)?;
        let tol = psd_tolerance(&eig.values);
        if let Some(&min) = eig.values.last() {
            if min < -tol {
                return Err(Error::NotPsd {
                    eigenvalue: min,
                    tolerance: tol,
                });
            }
        }
        Ok(PsdMatrix(s))
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        PsdMatrix::new(SymMatrix::new(m)?)
    }

    /// Wraps a matrix that is PSD by construction (congruences, projections).
    pub(crate) fn new_unchecked(s: SymMatrix) -> Self {
        PsdMatrix(s)
    }

    pub fn identity(d: usize) -> Self {
        PsdMatrix(SymMatrix::identity(d))
    }

    pub fn scaled_identity(d: usize, s: f64) -> Self {
        assert!(s >= 0.0);
        PsdMatrix(SymMatrix::scaled_identity(d, s))
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        PsdMatrix::new(SymMatrix::from_diag(diag))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    #[inline]
    pub fn as_matrix(&self) -> &Matrix {
        self.0.as_matrix()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `A · self · A`; PSD for every symmetric `A`.
    pub fn congruence(&self, a: &SymMatrix) -> PsdMatrix {
        PsdMatrix(self.0.congruence(a))
    }
}

impl Index<(usize, usize)> for PsdMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Eigenvalues (descending) with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let s = f(self.values[j]);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        let mut out = Matrix::zeros(d, d);
        gemm(1.0, &scaled, false, &self.vectors, true, 0.0, &mut out);
        SymMatrix::from_matrix(&out)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn psd_tolerance(values: &[f64]) -> f64 {
    PSD_REL_TOL * values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back sorted in descending order; each eigenvector is
/// flipped so that its first component with magnitude above `1e-12` is
/// positive, which makes the output reproducible bit for bit.
pub fn sym_eig(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)] * a[(i, j)];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = n <= 1 || off_norm(&a) <= f64::EPSILON * scale * 1e-2;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
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
        let off = off_norm(&a);
        converged = off <= f64::EPSILON * scale * 1e-2 || off == 0.0;
        if !converged && sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                residual: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their original order
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let flip = (0..n)
            .map(|k| v[(k, src)])
            .find(|x| x.abs() > 1e-12)
            .map_or(false, |x| x < 0.0);
        for k in 0..n {
            let x = v[(k, src)];
            vectors[(k, col)] = if flip { -x } else { x };
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Clamps eigenvalues inside the round-off band to zero, errors below it.
fn clamped_psd_eig(m: &SymMatrix) -> Result<SymEigen> {
    let mut eig = sym_eig(m)?;
    let tol = psd_tolerance(&eig.values);
    for v in eig.values.iter_mut() {
        if *v < 0.0 {
            if *v < -tol {
                return Err(Error::NotPsd {
                    eigenvalue: *v,
                    tolerance: tol,
                });
            }
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// Principal square root of a PSD matrix.
pub fn psd_sqrt(m: &PsdMatrix) -> Result<PsdMatrix> {
    let eig = clamped_psd_eig(m.as_sym())?;
    Ok(PsdMatrix::new_unchecked(eig.reconstruct_with(f64::sqrt)))
}

/// Pseudo-inverse square root together with the numerical rank it used.
#[derive(Clone, Debug)]
pub struct InvSqrt {
    pub matrix: SymMatrix,
    pub rank: usize,
}

impl InvSqrt {
    /// Every eigenvalue fell below the rank threshold.
    pub fn is_degenerate(&self) -> bool {
        self.rank == 0
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.matrix.dim()
    }
}

/// `M^{-1/2}` in the pseudo-inverse sense: eigenvalues at or below
/// `rank_tol * λ_max` map to zero.
pub fn psd_inv_sqrt(m: &PsdMatrix, rank_tol: f64) -> Result<InvSqrt> {
    let eig = clamped_psd_eig(m.as_sym())?;
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = rank_tol * lmax;
    let rank = eig.values.iter().filter(|&&v| v > cutoff && v > 0.0).count();
    if rank == 0 {
        log::warn!("psd_inv_sqrt: all eigenvalues below rank threshold, returning zero");
    }
    let matrix = eig.reconstruct_with(|v| if v > cutoff && v > 0.0 { 1.0 / v.sqrt() } else { 0.0 });
    Ok(InvSqrt { matrix, rank })
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped to 0).
pub fn psd_project(m: &SymMatrix) -> Result<PsdMatrix> {
    let eig = sym_eig(m)?;
    if eig.values.iter().all(|&v| v >= 0.0) {
        return Ok(PsdMatrix::new_unchecked(m.clone()));
    }
    Ok(PsdMatrix::new_unchecked(eig.reconstruct_with(|v| v.max(0.0))))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(sym_eig(m)?.values.last().copied().unwrap_or(0.0))
}

/// Lower Cholesky factor `L` with `L Lᵀ = M` and positive diagonal.
pub fn cholesky_factor(m: &PsdMatrix) -> Result<Matrix> {
    let n = m.dim();
    let a = m.as_matrix();
    let scale = (0..n).fold(0.0f64, |s, i| s.max(a[(i, i)].abs()));
    let pivot_floor = PSD_REL_TOL * scale;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > pivot_floor) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when `A` is numerically singular.
pub fn solve(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    assert!(a.is_square() && a.rows() == b.rows());
    let n = a.rows();
    let m = b.cols();
    let mut aa = a.clone();
    let mut bb = b.clone();
    let scale = aa.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| aa[(i, col)].abs().partial_cmp(&aa[(j, col)].abs()).unwrap())
            .unwrap();
        if aa[(piv, col)].abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                let tmp = aa[(col, k)];
                aa[(col, k)] = aa[(piv, k)];
                aa[(piv, k)] = tmp;
            }
            for k in 0..m {
                let tmp = bb[(col, k)];
                bb[(col, k)] = bb[(piv, k)];
                bb[(piv, k)] = tmp;
            }
        }
        for r in (col + 1)..n {
            let f = aa[(r, col)] / aa[(col, col)];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                aa[(r, k)] -= f * aa[(col, k)];
            }
            for k in 0..m {
                bb[(r, k)] -= f * bb[(col, k)];
            }
        }
    }
    let mut x = Matrix::zeros(n, m);
    for k in 0..m {
        for i in (0..n).rev() {
            let mut s = bb[(i, k)];
            for j in (i + 1)..n {
                s -= aa[(i, j)] * x[(j, k)];
            }
            x[(i, k)] = s / aa[(i, i)];
        }
    }
    Some(x)
}
