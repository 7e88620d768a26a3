//! Per-matrix stability and robustness summary.

use serde::{Deserialize, Serialize};

use crate::matrix::{Matrix, MatrixError, C64};
use crate::nonnormality;

/// Tolerance on `ρ ≤ 1` for the stability verdict.
pub const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<C64>,
    pub spectral_radius: f64,
    pub spectral_norm: f64,
    pub henrici: f64,
    pub schur_departure: f64,
    /// Present when a pseudospectrum field was evaluated.
    pub kreiss_lower_bound: Option<f64>,
}

impl SpectralReport {
    /// Eigenvalues inside the closed unit disk.
    pub fn is_stable(&self) -> bool {
        self.spectral_radius <= 1.0 + STABILITY_TOL
    }
}

/// Everything except the grid-based Kreiss estimate.
pub fn spectral_report(w: &Matrix) -> Result<SpectralReport, MatrixError> {
    let schur = w.schur()?;
    let spectral_radius = schur.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectralReport {
        spectral_radius,
        spectral_norm: w.two_norm()?,
        henrici: nonnormality::henrici_number(w)?,
        schur_departure: schur.n_strict.frobenius_norm(),
        eigenvalues: schur.eigenvalues,
        kreiss_lower_bound: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jordan_block_report() {
        let w = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let r = spectral_report(&w).unwrap();
        assert!(r.spectral_radius < 1e-12);
        assert!((r.spectral_norm - 1.0).abs() < 1e-12);
        assert!((r.henrici - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.schur_departure - 1.0).abs() < 1e-12);
        assert!(r.is_stable());
        assert!(!spectral_report(&Matrix::diag(&[1.1]).unwrap()).unwrap().is_stable());
    }
}
