//! Spectral stability and robustness analysis for recurrent weight
//! matrices.
//!
//! The crate trains small recurrent cells, then inspects their recurrent
//! matrices: eigenvalues and spectral radius (stability), Henrici's index
//! and Schur departure (non-normality), and ε-pseudospectra with Kreiss
//! bounds (robustness to perturbation). [`stabilizer`] rescales a matrix
//! into the unit disk by power iteration, which restores stability without
//! touching non-normality.

pub mod io;
pub mod matrix;
pub mod nonnormality;
pub mod pseudospectrum;
pub mod report;
pub mod rnn;
pub mod spectral;
pub mod stabilizer;

pub use matrix::{Matrix, MatrixError, SchurFactors, C64};
pub use spectral::{spectral_report, SpectralReport};

/// Crate version, echoed into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
