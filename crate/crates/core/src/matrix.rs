//! Dense complex matrices and the factorizations the rest of the toolkit
//! builds on.
//!
//! Every entry is a double-precision complex scalar; real matrices are the
//! special case with zero imaginary parts. Factorizations are delegated to
//! `nalgebra` and their results are checked against the residual contracts
//! documented on each method.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

pub use nalgebra::Complex;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

const SCHUR_MAX_ITER: usize = 10_000;
const SVD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimension { rows: usize, cols: usize },
    #[error("expected {expected} entries for the given shape, got {actual}")]
    EntryCount { expected: usize, actual: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

/// Dense, immutable, row-major (logically) complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    inner: DMatrix<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list()
            .entries((0..self.rows()).map(|i| {
                (0..self.cols())
                    .map(|j| self.get(i, j))
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl Matrix {
    fn checked(inner: DMatrix<C64>) -> Result<Self, MatrixError> {
        let (rows, cols) = inner.shape();
        if rows == 0 || cols == 0 {
            return Err(MatrixError::EmptyDimension { rows, cols });
        }
        for j in 0..cols {
            for i in 0..rows {
                let z = inner[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(MatrixError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Wraps an already-validated nalgebra matrix (internal results only).
    pub(crate) fn from_inner(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { inner }
    }

    /// Builds a real matrix from row-major data.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::EntryCount {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Self::checked(DMatrix::from_fn(rows, cols, |i, j| {
            C64::new(data[i * cols + j], 0.0)
        }))
    }

    /// Builds a complex matrix from row-major data.
    pub fn from_complex(rows: usize, cols: usize, data: &[C64]) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::EntryCount {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Self::checked(DMatrix::from_fn(rows, cols, |i, j| data[i * cols + j]))
    }

    /// Builds a real matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(MatrixError::EntryCount {
                    expected: r * c,
                    actual: rows.iter().map(Vec::len).sum(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_real(r, c, &data)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        f: impl FnMut(usize, usize) -> C64,
    ) -> Result<Self, MatrixError> {
        Self::checked(DMatrix::from_fn(rows, cols, f))
    }

    /// # Panics
    /// If `n == 0`.
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity of dimension zero");
        Self::from_inner(DMatrix::identity(n, n))
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self::from_inner(DMatrix::zeros(rows, cols))
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Result<Self, MatrixError> {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.inner.iter().all(|z| z.im == 0.0)
    }

    /// Row-major real parts.
    pub fn real_parts(&self) -> Vec<f64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)].re);
            }
        }
        out
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<C64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.inner
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        Self::from_inner(self.inner.adjoint())
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_inner(self.inner.transpose())
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Self::from_inner(self.inner.map(|z| z * factor))
    }

    pub fn scale_complex(&self, factor: C64) -> Matrix {
        Self::from_inner(self.inner.map(|z| z * factor))
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: C64) -> Result<Matrix, MatrixError> {
        self.require_square()?;
        let mut m = self.inner.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= shift;
        }
        Ok(Self::from_inner(m))
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        if self.cols() != rhs.rows() {
            return Err(MatrixError::ShapeMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self::from_inner(&self.inner * &rhs.inner))
    }

    pub fn try_add(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        self.same_shape(rhs)?;
        Ok(Self::from_inner(&self.inner + &rhs.inner))
    }

    pub fn try_sub(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        self.same_shape(rhs)?;
        Ok(Self::from_inner(&self.inner - &rhs.inner))
    }

    fn same_shape(&self, rhs: &Matrix) -> Result<(), MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(MatrixError::ShapeMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_square(&self) -> Result<usize, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        Ok(self.rows())
    }

    /// Square root of the sum of squared entry magnitudes.
    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn two_norm(&self) -> Result<f64, MatrixError> {
        Ok(self.singular_values()?[0])
    }

    /// All `min(rows, cols)` singular values, largest first.
    pub fn singular_values(&self) -> Result<Vec<f64>, MatrixError> {
        let svd = nalgebra::SVD::try_new(self.inner.clone(), false, false, f64::EPSILON, SVD_MAX_ITER)
            .ok_or(MatrixError::NoConvergence("singular value decomposition"))?;
        let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    /// Smallest singular value.
    pub fn min_singular_value(&self) -> Result<f64, MatrixError> {
        Ok(*self
            .singular_values()?
            .last()
            .expect("matrices are never empty"))
    }

    /// Eigenvalues with multiplicity, read off the diagonal of the complex
    /// Schur form.
    pub fn eigenvalues(&self) -> Result<Vec<C64>, MatrixError> {
        Ok(self.schur()?.eigenvalues)
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> Result<f64, MatrixError> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// Complex Schur decomposition `W = Q T Q*`.
    pub fn schur(&self) -> Result<SchurFactors, MatrixError> {
        let n = self.require_square()?;
        let already_triangular = (0..n).all(|j| ((j + 1)..n).all(|i| self.inner[(i, j)] == C64::new(0.0, 0.0)));
        let (q, mut t) = if already_triangular {
            (DMatrix::identity(n, n), self.inner.clone())
        } else {
            nalgebra::Schur::try_new(self.inner.clone(), f64::EPSILON, SCHUR_MAX_ITER)
                .ok_or(MatrixError::NoConvergence("Schur decomposition"))?
                .unpack()
        };
        for j in 0..n {
            for i in (j + 1)..n {
                t[(i, j)] = C64::new(0.0, 0.0);
            }
        }
        let eigenvalues = (0..n).map(|i| t[(i, i)]).collect();
        let mut strict = t.clone();
        for i in 0..n {
            strict[(i, i)] = C64::new(0.0, 0.0);
        }
        Ok(SchurFactors {
            q: Self::from_inner(q),
            t: Self::from_inner(t),
            eigenvalues,
            n_strict: Self::from_inner(strict),
        })
    }

    /// `two_norm(W^k)` for `k = 0..=l_max`; entry 0 is exactly 1.
    pub fn power_norms(&self, l_max: usize) -> Result<Vec<f64>, MatrixError> {
        let n = self.require_square()?;
        let mut out = Vec::with_capacity(l_max + 1);
        out.push(1.0);
        let mut power = DMatrix::<C64>::identity(n, n);
        for _ in 0..l_max {
            power = &power * &self.inner;
            out.push(Self::from_inner(power.clone()).two_norm()?);
        }
        Ok(out)
    }

    /// True when `W W* == W* W` entrywise within `tol` (absolute).
    pub fn commutes_with_adjoint(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let adj = self.inner.adjoint();
        let diff = &self.inner * &adj - &adj * &self.inner;
        diff.iter().all(|z| z.norm() <= tol)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols())
                .map(|j| {
                    let z = self.get(i, j);
                    if z.im == 0.0 {
                        format!("{}", z.re)
                    } else {
                        format!("{}{:+}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Output of [`Matrix::schur`].
#[derive(Debug, Clone)]
pub struct SchurFactors {
    /// Unitary factor.
    pub q: Matrix,
    /// Upper-triangular factor; entries below the diagonal are exactly zero.
    pub t: Matrix,
    /// Diagonal of `t`.
    pub eigenvalues: Vec<C64>,
    /// Strictly upper-triangular part of `t`.
    pub n_strict: Matrix,
}

impl SchurFactors {
    /// `Q T Q*`.
    pub fn reconstruct(&self) -> Matrix {
        let inner = self.q.as_nalgebra() * self.t.as_nalgebra() * self.q.as_nalgebra().adjoint();
        Matrix::from_inner(inner)
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;

    /// # Panics
    /// On incompatible shapes; use [`Matrix::try_mul`] to handle that case.
    fn mul(self, rhs: &'a Matrix) -> Matrix {
        self.try_mul(rhs).expect("incompatible shapes in matrix product")
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;

    fn add(self, rhs: &'a Matrix) -> Matrix {
        self.try_add(rhs).expect("incompatible shapes in matrix sum")
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &'a Matrix) -> Matrix {
        self.try_sub(rhs).expect("incompatible shapes in matrix difference")
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        Matrix::from_inner(-self.inner.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jordan() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn same_multiset(a: &[C64], b: &[C64], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.len() == b.len()
            && a.iter().all(|x| {
                let hit = b
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| !used[*k])
                    .find(|(_, y)| (*x - **y).norm() <= tol)
                    .map(|(k, _)| k);
                hit.map(|k| used[k] = true).is_some()
            })
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert_eq!(
            Matrix::from_real(1, 2, &[1.0, f64::NAN]),
            Err(MatrixError::NonFinite { row: 0, col: 1 })
        );
        assert!(matches!(
            Matrix::from_real(2, 2, &[1.0]),
            Err(MatrixError::EntryCount { expected: 4, actual: 1 })
        ));
        assert!(matches!(
            Matrix::from_real(0, 2, &[]),
            Err(MatrixError::EmptyDimension { .. })
        ));
        let rect = Matrix::from_real(2, 3, &[0.0; 6]).unwrap();
        assert!(matches!(rect.eigenvalues(), Err(MatrixError::NotSquare { .. })));
        assert!(matches!(rect.schur(), Err(MatrixError::NotSquare { .. })));
    }

    #[test]
    fn frobenius_examples() {
        assert!(close(Matrix::identity(2).frobenius_norm(), 2f64.sqrt(), 1e-15));
        assert_eq!(Matrix::zeros(3, 3).frobenius_norm(), 0.0);
        assert_eq!(jordan().frobenius_norm(), 1.0);
    }

    #[test]
    fn two_norm_examples() {
        let d = Matrix::diag(&[2.0, 0.5]).unwrap();
        assert!(close(d.two_norm().unwrap(), 2.0, 1e-12));
        assert!(close(jordan().two_norm().unwrap(), 1.0, 1e-12));
        assert!(close(Matrix::identity(7).two_norm().unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn singular_value_examples() {
        let sv = Matrix::diag(&[3.0, 1.0]).unwrap().singular_values().unwrap();
        assert!(close(sv[0], 3.0, 1e-12) && close(sv[1], 1.0, 1e-12));
        let sv = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]])
            .unwrap()
            .singular_values()
            .unwrap();
        assert!(close(sv[0], 2.0, 1e-12) && close(sv[1], 0.0, 1e-12));
        let rect = Matrix::from_real(2, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(rect.singular_values().unwrap().len(), 2);
    }

    #[test]
    fn eigenvalue_examples() {
        let ev = Matrix::diag(&[2.0, 0.5]).unwrap().eigenvalues().unwrap();
        assert!(same_multiset(&ev, &[C64::new(2.0, 0.0), C64::new(0.5, 0.0)], 1e-12));
        let rot = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let ev = rot.eigenvalues().unwrap();
        assert!(same_multiset(&ev, &[C64::new(0.0, 1.0), C64::new(0.0, -1.0)], 1e-12));
        let ev = jordan().eigenvalues().unwrap();
        assert!(ev.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn schur_of_triangular_input() {
        let w = Matrix::from_rows(&[vec![1.0, 3.0], vec![0.0, 2.0]]).unwrap();
        let s = w.schur().unwrap();
        assert!((&s.reconstruct() - &w).frobenius_norm() < 1e-12);
        assert!(close(s.n_strict.frobenius_norm(), 3.0, 1e-12));
        assert_eq!(s.n_strict.get(0, 0), C64::new(0.0, 0.0));
        assert_eq!(s.n_strict.get(1, 1), C64::new(0.0, 0.0));
        assert_eq!(s.t.get(1, 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn schur_of_hermitian_is_diagonal() {
        let h = Matrix::from_complex(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(1.0, -1.0),
                C64::new(1.0, 1.0),
                C64::new(-1.0, 0.0),
            ],
        )
        .unwrap();
        assert!(h.schur().unwrap().n_strict.frobenius_norm() <= 1e-10);
    }

    #[test]
    fn power_norm_examples() {
        assert_eq!(Matrix::identity(3).power_norms(5).unwrap(), vec![1.0; 6]);
        let pn = jordan().power_norms(2).unwrap();
        assert_eq!(pn[0], 1.0);
        assert!(close(pn[1], 1.0, 1e-12) && pn[2] == 0.0);
        let pn = Matrix::diag(&[0.5]).unwrap().power_norms(3).unwrap();
        for (got, want) in pn.iter().zip([1.0, 0.5, 0.25, 0.125]) {
            assert!(close(*got, want, 1e-15));
        }
    }

    #[test]
    fn shape_errors_on_products() {
        let a = Matrix::zeros(2, 3);
        assert!(a.try_mul(&a).is_err());
        assert!(a.try_add(&Matrix::zeros(3, 2)).is_err());
    }
}
