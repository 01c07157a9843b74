//! Dense real/complex matrix kernels, a cyclic-Jacobi symmetric eigensolver,
//! and an LU linear solver.
//!
//! Everything is row-major `Vec`-backed dense storage. The toolkit caps its
//! problem sizes well below the point where sparse formats or blocked kernels
//! would pay off, and dense arithmetic keeps every identity exact to rounding.

use num_complex::Complex64;
use thiserror::Error;

use crate::tol;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: ({0},{1}) vs ({2},{3})")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("linear system is singular (pivot {0:.3e})")]
    Singular(f64),
}

// ---------------------------------------------------------------------------
// Real matrices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self.set(i, j, v[i]);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Max `|A_ij − A_ji|` over all entry pairs.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Max entry deviation of `MᵀM` from the identity, ≤ `tol` means orthogonal.
    pub fn is_orthogonal(&self, tol: f64) -> Result<bool, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let gram = self.transpose().matmul(self)?;
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram.get(i, j) - target).abs());
            }
        }
        Ok(dev <= tol)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Complex matrices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::default(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
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
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::default() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![Complex64::default(); self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// True iff the max entry deviation of `M†M` from the identity is ≤ `tol`.
    pub fn is_unitary(&self, tol: f64) -> Result<bool, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let gram = self.adjoint().matmul(self)?;
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::default() };
                dev = dev.max((gram.get(i, j) - target).norm());
            }
        }
        Ok(dev <= tol)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == Complex64::default() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Matrix power by repeated squaring.
    pub fn pow(&self, mut e: u64) -> Result<Self, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// State-vector helpers
// ---------------------------------------------------------------------------

pub type CVec = Vec<Complex64>;

pub fn cvec_from_real(v: &[f64]) -> CVec {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_real(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ⟨a|b⟩ with conjugation on `a`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn inner_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

pub fn is_normalized(v: &[Complex64], tol: f64) -> bool {
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() <= tol
}

pub fn sub_vec(a: &[Complex64], b: &[Complex64]) -> CVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigenvalues in descending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: RealMatrix,
}

impl SpectralData {
    /// Reconstruct `VΛVᵀ`.
    pub fn reconstruct(&self) -> RealMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        RealMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v.get(i, k) * self.eigenvalues[k] * v.get(j, k)).sum()
        })
    }
}

fn offdiag_norm(a: &RealMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let x = a.get(i, j);
                s += x * x;
            }
        }
    }
    s.sqrt()
}

const MAX_JACOBI_SWEEPS: usize = 128;

/// Cyclic Jacobi eigendecomposition of a symmetric real matrix.
///
/// Sweeps Givens rotations over all off-diagonal pairs until the off-diagonal
/// norm falls below [`tol::JACOBI_OFFDIAG_TOL`] relative to the input scale.
/// Rejects inputs whose asymmetry exceeds [`tol::SYMMETRY_TOL`].
pub fn symmetric_eig(s: &RealMatrix) -> Result<SpectralData, LinalgError> {
    if s.rows() != s.cols() {
        return Err(LinalgError::NotSquare { rows: s.rows(), cols: s.cols() });
    }
    let asym = s.max_asymmetry();
    if asym > tol::SYMMETRY_TOL {
        return Err(LinalgError::NotSymmetric(asym));
    }
    let n = s.rows();
    // Work on the symmetrized copy so rounding in the input cannot leak through.
    let mut a = RealMatrix::from_fn(n, n, |i, j| 0.5 * (s.get(i, j) + s.get(j, i)));
    let mut v = RealMatrix::identity(n);
    if n > 1 {
        let stop = tol::JACOBI_OFFDIAG_TOL * a.frobenius_norm().max(1.0);
        let mut converged = false;
        for _ in 0..MAX_JACOBI_SWEEPS {
            if offdiag_norm(&a) <= stop {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= f64::EPSILON * stop.max(f64::MIN_POSITIVE) {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = t * c;
                    // Rotate rows/columns p and q of the symmetric matrix.
                    for i in 0..n {
                        let aip = a.get(i, p);
                        let aiq = a.get(i, q);
                        a.set(i, p, c * aip - sn * aiq);
                        a.set(i, q, sn * aip + c * aiq);
                    }
                    for j in 0..n {
                        let apj = a.get(p, j);
                        let aqj = a.get(q, j);
                        a.set(p, j, c * apj - sn * aqj);
                        a.set(q, j, sn * apj + c * aqj);
                    }
                    for i in 0..n {
                        let vip = v.get(i, p);
                        let viq = v.get(i, q);
                        v.set(i, p, c * vip - sn * viq);
                        v.set(i, q, sn * vip + c * viq);
                    }
                }
            }
        }
        if !converged && offdiag_norm(&a) > stop {
            return Err(LinalgError::NoConvergence(MAX_JACOBI_SWEEPS));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let eigenvalues = order.iter().map(|&k| a.get(k, k)).collect();
    let eigenvectors = RealMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(SpectralData { eigenvalues, eigenvectors })
}

// ---------------------------------------------------------------------------
// Dense LU solve
// ---------------------------------------------------------------------------

/// Solve `Ax = b` by LU with partial pivoting.
pub fn solve_linear(a: &RealMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    assert_eq!(b.len(), n, "rhs length mismatch");
    let mut m = a.clone();
    let mut x: Vec<f64> = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        let mut best = m.get(k, k).abs();
        for i in k + 1..n {
            let v = m.get(i, k).abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Err(LinalgError::Singular(0.0));
        }
        if piv != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            x.swap(k, piv);
        }
        let pivot = m.get(k, k);
        for i in k + 1..n {
            let f = m.get(i, k) / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                let v = m.get(i, j) - f * m.get(k, j);
                m.set(i, j, v);
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m.get(i, j) * x[j];
        }
        x[i] = s / m.get(i, i);
    }
    Ok(x)
}
