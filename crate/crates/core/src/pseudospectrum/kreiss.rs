//! Pseudospectral radii and the Kreiss-constant sandwich around
//! `sup_l ‖W^l‖`.

use serde::{Deserialize, Serialize};

use super::field::PseudospectrumField;
use crate::matrix::{Matrix, MatrixError};

/// Relative slack allowed on both sides of the sandwich; both suprema are
/// finite-sample estimates.
pub const SANDWICH_SLACK: f64 = 0.05;

/// Upper limit on the adaptive power horizon.
const MAX_POWER_HORIZON: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KreissError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("spectral radius {0} is not below 1; sup of power norms is unbounded")]
    NotStable(f64),
    #[error("at least one positive epsilon is required")]
    NoEpsilon,
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
}

/// Largest modulus over grid nodes with value `≤ eps`. With no qualifying
/// node the spectral radius is returned, since eigenvalues always belong to
/// every pseudospectrum. A lower approximation by construction.
pub fn pseudospectral_radius(field: &PseudospectrumField, eps: f64) -> f64 {
    let spectral = field
        .eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    field
        .nodes_in(eps)
        .map(|(_, _, z)| z.norm())
        .fold(spectral, f64::max)
}

/// `max_ε (ρ_ε − 1) / ε` over the supplied ε values.
pub fn kreiss_lower_bound(field: &PseudospectrumField, eps_list: &[f64]) -> Result<f64, KreissError> {
    if eps_list.is_empty() {
        return Err(KreissError::NoEpsilon);
    }
    let mut best = f64::NEG_INFINITY;
    for &eps in eps_list {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(KreissError::BadEpsilon(eps));
        }
        best = best.max((pseudospectral_radius(field, eps) - 1.0) / eps);
    }
    Ok(best)
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KreissSandwich {
    /// Finite-sample Kreiss lower bound.
    pub lhs: f64,
    /// `max_l ‖W^l‖` over the (possibly extended) horizon.
    pub mid: f64,
    /// `e · n · lhs`.
    pub rhs: f64,
    /// Horizon actually used.
    pub l_max: usize,
    pub holds: bool,
}

/// Power norms up to `l_max`, doubling the horizon while the last entry is
/// still the running maximum.
pub fn peak_power_norm(w: &Matrix, l_max: usize) -> Result<(f64, usize), MatrixError> {
    let mut horizon = l_max.max(1);
    loop {
        let norms = w.power_norms(horizon)?;
        let (argmax, peak) = norms
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
        if argmax < horizon || horizon >= MAX_POWER_HORIZON {
            return Ok((peak, horizon));
        }
        horizon *= 2;
    }
}

/// Checks `lhs ≤ mid ≤ e·n·lhs`, each inequality with [`SANDWICH_SLACK`].
/// Requires `ρ(W) < 1`.
pub fn kreiss_sandwich_check(
    w: &Matrix,
    field: &PseudospectrumField,
    eps_list: &[f64],
    l_max: usize,
) -> Result<KreissSandwich, KreissError> {
    let n = w.require_square()?;
    let rho = w.spectral_radius()?;
    if rho >= 1.0 {
        return Err(KreissError::NotStable(rho));
    }
    let lhs = kreiss_lower_bound(field, eps_list)?;
    let (mid, l_max) = peak_power_norm(w, l_max)?;
    let rhs = std::f64::consts::E * n as f64 * lhs;
    let holds = lhs <= mid * (1.0 + SANDWICH_SLACK) && mid <= rhs * (1.0 + SANDWICH_SLACK);
    Ok(KreissSandwich {
        lhs,
        mid,
        rhs,
        l_max,
        holds,
    })
}

/// `(‖W‖₂ · max σ')^horizon`, the bound on the state-Jacobian product over
/// `horizon` steps.
pub fn jacobian_norm_bound_check(
    w: &Matrix,
    activation_derivative_max: f64,
    horizon: usize,
) -> Result<f64, MatrixError> {
    Ok((w.two_norm()? * activation_derivative_max).powi(horizon as i32))
}
