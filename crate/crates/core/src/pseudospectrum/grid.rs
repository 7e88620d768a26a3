use serde::{Deserialize, Serialize};

use crate::matrix::{Matrix, MatrixError, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid needs at least 2 nodes per axis, got {nx}x{ny}")]
    TooFewNodes { nx: usize, ny: usize },
    #[error("degenerate or non-finite bounding box")]
    BadBox,
}

/// Rectangular lattice over a box in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self, GridError> {
        if nx < 2 || ny < 2 {
            return Err(GridError::TooFewNodes { nx, ny });
        }
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || re_min >= re_max || im_min >= im_max {
            return Err(GridError::BadBox);
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
            nx,
            ny,
        })
    }

    /// Spacing along the real axis.
    pub fn dx(&self) -> f64 {
        (self.re_max - self.re_min) / (self.nx - 1) as f64
    }

    /// Spacing along the imaginary axis.
    pub fn dy(&self) -> f64 {
        (self.im_max - self.im_min) / (self.ny - 1) as f64
    }

    /// Largest node spacing, the resolution of any grid-derived quantity.
    pub fn step(&self) -> f64 {
        self.dx().max(self.dy())
    }

    pub fn re_at(&self, i: usize) -> f64 {
        self.re_min + i as f64 * self.dx()
    }

    pub fn im_at(&self, j: usize) -> f64 {
        self.im_min + j as f64 * self.dy()
    }

    /// Complex coordinate of node `(i, j)`; `i` runs along the real axis.
    pub fn node(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re_at(i), self.im_at(j))
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Smallest box covering both grids, at the finer of the two resolutions.
    pub fn union(&self, other: &GridSpec) -> GridSpec {
        GridSpec {
            re_min: self.re_min.min(other.re_min),
            re_max: self.re_max.max(other.re_max),
            im_min: self.im_min.min(other.im_min),
            im_max: self.im_max.max(other.im_max),
            nx: self.nx.max(other.nx),
            ny: self.ny.max(other.ny),
        }
    }
}

/// Bounding box of the eigenvalues and of the closed unit disk, both
/// padded by `pad` on every side.
pub fn auto_grid(w: &Matrix, pad: f64, nx: usize, ny: usize) -> Result<GridSpec, AutoGridError> {
    let eigenvalues = w.eigenvalues()?;
    Ok(grid_around(&eigenvalues, pad, nx, ny)?)
}

/// [`auto_grid`] for precomputed eigenvalues.
pub fn grid_around(eigenvalues: &[C64], pad: f64, nx: usize, ny: usize) -> Result<GridSpec, GridError> {
    let (mut re_min, mut re_max, mut im_min, mut im_max) = (-1.0f64, 1.0f64, -1.0f64, 1.0f64);
    for z in eigenvalues {
        re_min = re_min.min(z.re);
        re_max = re_max.max(z.re);
        im_min = im_min.min(z.im);
        im_max = im_max.max(z.im);
    }
    let pad = pad.max(0.0);
    GridSpec::new(re_min - pad, re_max + pad, im_min - pad, im_max + pad, nx, ny)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AutoGridError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
