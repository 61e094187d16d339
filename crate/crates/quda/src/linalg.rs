//! Dense symmetric linear algebra and proximal primitives.
//!
//! Everything downstream (moment estimation, the ADMM solver, the lasso, the
//! synthetic generators) is built on the small kernel in this module: a plain
//! row-major matrix, a symmetry-checked wrapper, a cyclic Jacobi
//! eigendecomposition, the soft-thresholding operator, and eigenvalue-based
//! SPD inverse / log-determinant. No external numerical libraries are used;
//! the Jacobi sweep order is fixed so results are deterministic for a given
//! input.

use crate::constants;
use crate::error::{shape_mismatch, QudaError, Result};

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row slices; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(QudaError::EmptyInput);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(shape_mismatch(
                    format!("row of length {cols}"),
                    format!("row {i} of length {}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transposed(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `out = self * rhs`. Uses the i-k-j loop order so the inner loop runs
    /// over contiguous rows of both `rhs` and `out`.
    pub fn matmul_into(&self, rhs: &Mat, out: &mut Mat) {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        assert_eq!(out.rows, self.rows);
        assert_eq!(out.cols, rhs.cols);
        out.data.fill(0.0);
        for i in 0..self.rows {
            let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a_ik) in a_row.iter().enumerate() {
                if a_ik == 0.0 {
                    continue;
                }
                let b_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a_ik * b;
                }
            }
        }
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, rhs.cols);
        self.matmul_into(rhs, &mut out);
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(shape_mismatch(
                format!("vector of length {}", self.cols),
                format!("length {}", v.len()),
            ));
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect())
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&rhs.data) {
            *o += b;
        }
        out
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&rhs.data) {
            *o -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o *= s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Square matrix guaranteed symmetric within [`constants::SYMMETRY_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    mat: Mat,
}

impl SymMatrix {
    /// Validates squareness, finiteness and symmetry of `mat`.
    pub fn new(mat: Mat) -> Result<Self> {
        if mat.rows != mat.cols {
            return Err(shape_mismatch(
                "square matrix",
                format!("{}x{}", mat.rows, mat.cols),
            ));
        }
        if !mat.is_finite() {
            return Err(QudaError::NonFinite { what: "matrix" });
        }
        for i in 0..mat.rows {
            for j in (i + 1)..mat.cols {
                if (mat.get(i, j) - mat.get(j, i)).abs() > constants::SYMMETRY_TOL {
                    return Err(shape_mismatch(
                        "symmetric matrix",
                        format!(
                            "entry ({i},{j})={} vs ({j},{i})={}",
                            mat.get(i, j),
                            mat.get(j, i)
                        ),
                    ));
                }
            }
        }
        Ok(SymMatrix { mat })
    }

    /// `(M + Mᵀ)/2`, making any square finite matrix exactly symmetric.
    pub fn symmetrized(mat: &Mat) -> Result<Self> {
        if mat.rows != mat.cols {
            return Err(shape_mismatch(
                "square matrix",
                format!("{}x{}", mat.rows, mat.cols),
            ));
        }
        if !mat.is_finite() {
            return Err(QudaError::NonFinite { what: "matrix" });
        }
        let n = mat.rows;
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            out.set(i, i, mat.get(i, i));
            for j in (i + 1)..n {
                let v = 0.5 * (mat.get(i, j) + mat.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        Ok(SymMatrix { mat: out })
    }

    /// Fills both triangles from `f(i, j)` evaluated on `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut mat = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                mat.set(i, j, v);
                mat.set(j, i, v);
            }
        }
        SymMatrix { mat }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { mat: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix { mat: Mat::identity(n) }
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut mat = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            mat.set(i, i, v);
        }
        SymMatrix { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn as_mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }
}

impl std::ops::Deref for SymMatrix {
    type Target = Mat;

    fn deref(&self) -> &Mat {
        &self.mat
    }
}

/// Eigendecomposition `A = U diag(d) Uᵀ` of a symmetric matrix.
///
/// Eigenvalues are sorted descending; `vectors` holds the matching
/// eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub vectors: Mat,
    pub values: Vec<f64>,
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps the strict upper triangle in row-major order, which makes the
/// result deterministic for a fixed input. The sweep budget comes from
/// [`constants::JACOBI_MAX_SWEEPS`].
pub fn sym_eigen(a: &SymMatrix) -> Result<SymEigen> {
    if !a.is_finite() {
        return Err(QudaError::NonFinite { what: "matrix" });
    }
    let n = a.dim();
    let mut m = a.as_mat().clone();
    let mut v = Mat::identity(n);
    let scale = a.max_abs().max(1.0);
    let tol = constants::JACOBI_OFF_TOL * scale;

    let mut off = max_off_diag(&m);
    let mut sweeps = 0;
    while off > tol {
        if sweeps >= constants::JACOBI_MAX_SWEEPS {
            return Err(QudaError::EigenNoConvergence {
                sweeps,
                off_diag: off,
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                jacobi_rotate(&mut m, &mut v, p, q, tol);
            }
        }
        sweeps += 1;
        off = max_off_diag(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m.get(j, j)
            .partial_cmp(&m.get(i, i))
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok(SymEigen { vectors, values })
}

fn max_off_diag(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(m.get(i, j).abs());
        }
    }
    worst
}

/// One Jacobi rotation annihilating `m[p][q]`; `v` accumulates eigenvectors.
///
/// Rows `p`/`q` are updated contiguously, then mirrored into the columns to
/// keep `m` exactly symmetric.
fn jacobi_rotate(m: &mut Mat, v: &mut Mat, p: usize, q: usize, tol: f64) {
    let apq = m.get(p, q);
    if apq.abs() <= tol {
        return;
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        1.0 / (theta - (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = m.nrows();
    for k in 0..n {
        let mkp = m.get(p, k);
        let mkq = m.get(q, k);
        m.set(p, k, c * mkp - s * mkq);
        m.set(q, k, s * mkp + c * mkq);
    }
    for k in 0..n {
        m.set(k, p, m.get(p, k));
        m.set(k, q, m.get(q, k));
    }
    let new_pp = c * c * app - 2.0 * s * c * apq + s * s * aqq;
    let new_qq = s * s * app + 2.0 * s * c * apq + c * c * aqq;
    m.set(p, p, new_pp);
    m.set(q, q, new_qq);
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

/// Entrywise soft-thresholding `sign(a)(|a| - b)₊` of a scalar.
#[inline]
pub fn soft_threshold_scalar(a: f64, b: f64) -> f64 {
    if a > b {
        a - b
    } else if a < -b {
        a + b
    } else {
        0.0
    }
}

/// Entrywise soft-thresholding of a matrix. `b` must be nonnegative.
pub fn soft_threshold_mat(a: &Mat, b: f64) -> Result<Mat> {
    if b < 0.0 {
        return Err(QudaError::NegativeThreshold(b));
    }
    let mut out = a.clone();
    for v in out.data_mut() {
        *v = soft_threshold_scalar(*v, b);
    }
    Ok(out)
}

/// Entrywise soft-thresholding of a vector. `b` must be nonnegative.
pub fn soft_threshold_vec(a: &[f64], b: f64) -> Result<Vec<f64>> {
    if b < 0.0 {
        return Err(QudaError::NegativeThreshold(b));
    }
    Ok(a.iter().map(|&v| soft_threshold_scalar(v, b)).collect())
}

fn spd_eigen(a: &SymMatrix) -> Result<SymEigen> {
    let eig = sym_eigen(a)?;
    let d_max = eig.values[0];
    let d_min = *eig.values.last().expect("dim >= 1");
    if d_max <= 0.0 || d_min <= constants::SPD_REL_TOL * d_max {
        return Err(QudaError::NotPositiveDefinite {
            min_eigenvalue: d_min,
        });
    }
    Ok(eig)
}

/// Inverse of a symmetric positive definite matrix via its eigendecomposition.
pub fn mat_inverse_spd(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = spd_eigen(a)?;
    let n = a.dim();
    // U diag(1/d) Uᵀ, assembled on the upper triangle and mirrored.
    let mut out = Mat::zeros(n, n);
    let inv_d: Vec<f64> = eig.values.iter().map(|&d| 1.0 / d).collect();
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += eig.vectors.get(i, k) * inv_d[k] * eig.vectors.get(j, k);
            }
            out.set(i, j, s);
            out.set(j, i, s);
        }
    }
    SymMatrix::new(out)
}

/// `log |A|` for symmetric positive definite `A`.
pub fn log_det_spd(a: &SymMatrix) -> Result<f64> {
    let eig = spd_eigen(a)?;
    Ok(eig.values.iter().map(|&d| d.ln()).sum())
}
