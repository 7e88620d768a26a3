//! Departure-from-normality measures.
//!
//! All norms here are Frobenius. Henrici's index is normalized by `‖W‖_F²`,
//! which keeps it scale invariant and well defined for nilpotent inputs.

use serde::{Deserialize, Serialize};

use crate::matrix::{Matrix, MatrixError, C64};

/// Summary of how far a square matrix is from normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonNormalityReport {
    /// `‖WW* − W*W‖_F / ‖W‖_F²`.
    pub henrici: f64,
    /// `‖N‖_F` where `N` is the strictly upper part of the Schur factor.
    pub schur_departure: f64,
    pub is_normal: bool,
    /// `‖WW* − W*W‖_F`.
    pub commutator_norm: f64,
    /// Set for the zero matrix, where the index is defined as zero.
    pub degenerate: bool,
}

fn commutator(w: &Matrix) -> Matrix {
    let adj = w.adjoint();
    &(w * &adj) - &(&adj * w)
}

/// `‖WW* − W*W‖_F`.
pub fn commutator_norm(w: &Matrix) -> Result<f64, MatrixError> {
    w.require_square()?;
    Ok(commutator(w).frobenius_norm())
}

/// Henrici's departure-from-normality index. Zero for normal matrices and,
/// by convention, for the zero matrix.
pub fn henrici_number(w: &Matrix) -> Result<f64, MatrixError> {
    let comm = commutator_norm(w)?;
    let fro_sq = w.frobenius_norm().powi(2);
    if fro_sq == 0.0 {
        return Ok(0.0);
    }
    Ok(comm / fro_sq)
}

/// Eigenvalues together with `‖N‖_F` from the complex Schur form.
pub fn schur_departure(w: &Matrix) -> Result<(Vec<C64>, f64), MatrixError> {
    let schur = w.schur()?;
    Ok((schur.eigenvalues, schur.n_strict.frobenius_norm()))
}

/// `‖WW* − W*W‖_F ≤ tol · max(1, ‖W‖_F²)`. Non-square input is never normal.
pub fn is_normal(w: &Matrix, tol: f64) -> bool {
    if !w.is_square() {
        return false;
    }
    let scale = w.frobenius_norm().powi(2).max(1.0);
    commutator(w).frobenius_norm() <= tol * scale
}

/// Computes every measure at once. The `is_normal` flag additionally
/// requires the Henrici index and Schur departure to sit below `tol`, so a
/// report never calls a matrix normal while one of its own measures says
/// otherwise.
pub fn analyze(w: &Matrix, tol: f64) -> Result<NonNormalityReport, MatrixError> {
    let commutator_norm = commutator_norm(w)?;
    let fro = w.frobenius_norm();
    let degenerate = fro == 0.0;
    let henrici = if degenerate {
        0.0
    } else {
        commutator_norm / (fro * fro)
    };
    let (_, schur_departure) = schur_departure(w)?;
    let is_normal = is_normal(w, tol) && henrici <= tol && schur_departure <= tol * fro.max(1.0);
    Ok(NonNormalityReport {
        henrici,
        schur_departure,
        is_normal,
        commutator_norm,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jordan() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
    }

    fn circulant(first_row: &[f64]) -> Matrix {
        let n = first_row.len();
        Matrix::from_fn(n, n, |i, j| C64::new(first_row[(j + n - i) % n], 0.0)).unwrap()
    }

    /// Commutator computed entry by entry with explicit sums.
    fn brute_commutator_fro(w: &Matrix) -> f64 {
        let n = w.rows();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut ww = C64::new(0.0, 0.0);
                let mut wsw = C64::new(0.0, 0.0);
                for k in 0..n {
                    ww += w.get(i, k) * w.get(j, k).conj();
                    wsw += w.get(k, i).conj() * w.get(k, j);
                }
                total += (ww - wsw).norm_sqr();
            }
        }
        total.sqrt()
    }

    #[test]
    fn henrici_examples() {
        assert_eq!(henrici_number(&Matrix::identity(4)).unwrap(), 0.0);
        let j = jordan();
        assert!((brute_commutator_fro(&j) - 2f64.sqrt()).abs() < 1e-15);
        assert!((henrici_number(&j).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let z = Matrix::zeros(3, 3);
        assert_eq!(henrici_number(&z).unwrap(), 0.0);
        let report = analyze(&z, 1e-10).unwrap();
        assert!(report.degenerate && report.is_normal);
    }

    #[test]
    fn departure_examples() {
        let w = Matrix::from_rows(&[vec![1.0, 3.0], vec![0.0, 2.0]]).unwrap();
        let (_, dep) = schur_departure(&w).unwrap();
        assert!((dep - 3.0).abs() < 1e-10);
        let (ev, dep) = schur_departure(&jordan()).unwrap();
        assert!((dep - 1.0).abs() < 1e-12);
        assert!(ev.iter().all(|z| z.norm() < 1e-12));
        let herm = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, -3.0]]).unwrap();
        assert!(schur_departure(&herm).unwrap().1 <= 1e-10);
    }

    #[test]
    fn normality_predicate() {
        let rot = Matrix::from_rows(&[vec![0.6, -0.8], vec![0.8, 0.6]]).unwrap();
        assert!(is_normal(&rot, 1e-12));
        assert!(!is_normal(&jordan(), 1e-8));
        let c = circulant(&[1.0, -2.0, 0.5, 3.0]);
        assert!(brute_commutator_fro(&c) < 1e-12);
        assert!(is_normal(&c, 1e-12));
        assert!(!is_normal(&Matrix::zeros(2, 3), 1.0));
    }

    #[test]
    fn report_invariants() {
        let w = Matrix::from_rows(&[vec![0.3, 2.0, 0.0], vec![0.0, -0.1, 1.0], vec![0.5, 0.0, 0.2]])
            .unwrap();
        let r = analyze(&w, 1e-10).unwrap();
        let fro = w.frobenius_norm();
        assert!((r.henrici - r.commutator_norm / (fro * fro)).abs() < 1e-15);
        assert!((r.commutator_norm - brute_commutator_fro(&w)).abs() < 1e-12);
        assert!(!r.is_normal);
    }

    #[test]
    fn non_square_rejected() {
        assert!(henrici_number(&Matrix::zeros(2, 3)).is_err());
    }
}
