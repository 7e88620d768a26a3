//! ε-pseudospectra on complex-plane grids.
//!
//! A point λ belongs to the ε-pseudospectrum of `W` when
//! `σ_min(W − λI) ≤ ε`, i.e. when the resolvent norm `‖(W − λI)⁻¹‖` is at
//! least `1/ε`. [`compute_field`] samples `σ_min(W − λI)` on a grid;
//! contours, pseudospectral radii and Kreiss bounds are derived from the
//! sampled field.

pub mod contour;
pub mod field;
pub mod grid;
pub mod kreiss;

pub use contour::{extract_contours, ContourError, ContourSet, Polyline};
pub use field::{
    compute_field, compute_field_with, sigma_min_at, FieldMethod, FieldOptions, PseudospectrumField,
};
pub use grid::{auto_grid, grid_around, AutoGridError, GridError, GridSpec};
pub use kreiss::{
    jacobian_norm_bound_check, kreiss_lower_bound, kreiss_sandwich_check, log_spaced,
    peak_power_norm, pseudospectral_radius, KreissError, KreissSandwich, SANDWICH_SLACK,
};

/// Default grid resolution per axis.
pub const DEFAULT_GRID_NODES: usize = 200;
/// Default padding around the eigenvalue / unit-disk box.
pub const DEFAULT_PAD: f64 = 0.5;

/// Default contour levels, `10^-3 … 10^-0.5` in half-decade steps.
pub fn default_levels() -> Vec<f64> {
    [-3.0, -2.5, -2.0, -1.5, -1.0, -0.5]
        .iter()
        .map(|e: &f64| 10f64.powf(*e))
        .collect()
}
