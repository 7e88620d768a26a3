use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::matrix::{Matrix, MatrixError, C64};

/// `σ_min(W − λI)` sampled on every node of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudospectrumField {
    pub grid: GridSpec,
    /// Node values, `values[i * ny + j]` for real index `i`, imaginary index `j`.
    pub values: Vec<f64>,
    pub eigenvalues: Vec<C64>,
    pub source_dim: usize,
}

impl PseudospectrumField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.ny + j]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Number of nodes inside the ε-pseudospectrum. Used as an area proxy.
    pub fn nodes_within(&self, eps: f64) -> usize {
        self.values.iter().filter(|&&v| v <= eps).count()
    }

    /// Nodes `(i, j, λ)` whose value is at most `eps`.
    pub fn nodes_in(&self, eps: f64) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let ny = self.grid.ny;
        self.values
            .iter()
            .enumerate()
            .filter(move |(_, &v)| v <= eps)
            .map(move |(k, _)| (k / ny, k % ny, self.grid.node(k / ny, k % ny)))
    }
}

/// How each node value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FieldMethod {
    /// Full singular value decomposition of `W − λI` at every node.
    #[default]
    Svd,
    /// One Schur reduction, then inverse iteration on the shifted
    /// triangular factor at each node; falls back to SVD when the
    /// iteration stalls.
    SchurInverseIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FieldOptions {
    pub method: FieldMethod,
    /// Worker threads; `None` uses the ambient pool.
    pub workers: Option<usize>,
}

/// Smallest singular value of `W − λI`.
pub fn sigma_min_at(w: &Matrix, lambda: C64) -> Result<f64, MatrixError> {
    w.shifted(lambda)?.min_singular_value()
}

/// Evaluates the field with the baseline SVD method.
pub fn compute_field(w: &Matrix, grid: &GridSpec) -> Result<PseudospectrumField, MatrixError> {
    compute_field_with(w, grid, FieldOptions::default())
}

pub fn compute_field_with(
    w: &Matrix,
    grid: &GridSpec,
    opts: FieldOptions,
) -> Result<PseudospectrumField, MatrixError> {
    let n = w.require_square()?;
    let schur = w.schur()?;
    let eigenvalues = schur.eigenvalues.clone();
    let evaluator: Box<dyn Fn(C64) -> Result<f64, MatrixError> + Sync> = match opts.method {
        FieldMethod::Svd => {
            let w = w.clone();
            Box::new(move |lambda| sigma_min_at(&w, lambda))
        }
        FieldMethod::SchurInverseIteration => {
            let t = schur.t.as_nalgebra().clone();
            Box::new(move |lambda| triangular_sigma_min(&t, lambda))
        }
    };

    let mut values = vec![0.0; grid.node_count()];
    fill_nodes(&mut values, grid, &*evaluator, opts.workers)?;
    Ok(PseudospectrumField {
        grid: *grid,
        values,
        eigenvalues,
        source_dim: n,
    })
}

type NodeFn<'a> = dyn Fn(C64) -> Result<f64, MatrixError> + Sync + 'a;

/// Every node writes exactly its own slot, so the result does not depend on
/// scheduling or worker count.
#[cfg(feature = "parallel")]
fn fill_nodes(
    values: &mut [f64],
    grid: &GridSpec,
    eval: &NodeFn<'_>,
    workers: Option<usize>,
) -> Result<(), MatrixError> {
    use rayon::prelude::*;

    let run = |values: &mut [f64]| -> Result<(), MatrixError> {
        values
            .par_iter_mut()
            .enumerate()
            .try_for_each(|(k, slot)| {
                *slot = eval(grid.node(k / grid.ny, k % grid.ny))?;
                Ok(())
            })
    };
    match workers {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .expect("thread pool construction");
            pool.install(|| run(values))
        }
        None => run(values),
    }
}

#[cfg(not(feature = "parallel"))]
fn fill_nodes(
    values: &mut [f64],
    grid: &GridSpec,
    eval: &NodeFn<'_>,
    _workers: Option<usize>,
) -> Result<(), MatrixError> {
    for (k, slot) in values.iter_mut().enumerate() {
        *slot = eval(grid.node(k / grid.ny, k % grid.ny))?;
    }
    Ok(())
}

const INVERSE_MAX_ITER: usize = 400;
const INVERSE_RTOL: f64 = 1e-9;

/// `σ_min(T − λI)` for upper-triangular `T` by inverse iteration on
/// `((T − λI)*(T − λI))⁻¹`, using two triangular solves per step.
fn triangular_sigma_min(t: &DMatrix<C64>, lambda: C64) -> Result<f64, MatrixError> {
    let n = t.nrows();
    let mut a = t.clone();
    for i in 0..n {
        a[(i, i)] -= lambda;
        if a[(i, i)] == C64::new(0.0, 0.0) {
            return Ok(0.0);
        }
    }

    // Fixed start vector keeps every node independent of evaluation order.
    let mut x: Vec<C64> = (0..n)
        .map(|k| C64::new(1.0, 0.25 * ((k % 7) as f64 - 3.0) / 7.0))
        .collect();
    normalize(&mut x);
    let mut y = vec![C64::new(0.0, 0.0); n];
    let mut z = vec![C64::new(0.0, 0.0); n];
    for _ in 0..INVERSE_MAX_ITER {
        solve_adjoint_lower(&a, &x, &mut y);
        solve_upper(&a, &y, &mut z);
        // Rayleigh quotient x*(A*A)⁻¹x and its residual.
        let mu = y.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let scale = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !mu.is_finite() || !scale.is_finite() || scale == 0.0 {
            return Ok(0.0);
        }
        let residual = z
            .iter()
            .zip(&x)
            .map(|(zi, xi)| (*zi - *xi * mu).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= INVERSE_RTOL * mu {
            return Ok(1.0 / mu.sqrt());
        }
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = *zi / scale;
        }
    }
    let shifted = Matrix::from_inner(a);
    shifted.min_singular_value()
}

fn normalize(x: &mut [C64]) {
    let s = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in x {
        *z /= s;
    }
}

/// Solves `A* y = b` with `A` upper triangular (so `A*` is lower).
fn solve_adjoint_lower(a: &DMatrix<C64>, b: &[C64], y: &mut [C64]) {
    let n = b.len();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[(k, i)].conj() * y[k];
        }
        y[i] = s / a[(i, i)].conj();
    }
}

/// Solves `A x = b` with `A` upper triangular.
fn solve_upper(a: &DMatrix<C64>, b: &[C64], x: &mut [C64]) {
    let n = b.len();
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[(i, k)] * x[k];
        }
        x[i] = s / a[(i, i)];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jordan() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()
    }

    /// σ_min of a 2×2 matrix from the closed-form eigenvalues of `A*A`.
    fn sigma_min_2x2(a: [[C64; 2]; 2]) -> f64 {
        let p = a[0][0].norm_sqr() + a[1][0].norm_sqr();
        let s = a[0][1].norm_sqr() + a[1][1].norm_sqr();
        let q = a[0][0].conj() * a[0][1] + a[1][0].conj() * a[1][1];
        let tr = p + s;
        let det = p * s - q.norm_sqr();
        let disc = ((tr * tr / 4.0) - det).max(0.0).sqrt();
        (tr / 2.0 - disc).max(0.0).sqrt()
    }

    #[test]
    fn sigma_min_examples() {
        let got = sigma_min_at(&Matrix::identity(2), C64::new(1.0, 0.3)).unwrap();
        assert!((got - 0.3).abs() < 1e-12);
        assert!(sigma_min_at(&jordan(), C64::new(0.0, 0.0)).unwrap() < 1e-15);

        let oracle = sigma_min_2x2([
            [C64::new(-0.5, 0.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-0.5, 0.0)],
        ]);
        let closed_form = (2f64.sqrt() - 1.0) / 2.0;
        assert!((oracle - closed_form).abs() < 1e-12);
        let got = sigma_min_at(&jordan(), C64::new(0.5, 0.0)).unwrap();
        assert!((got - closed_form).abs() < 1e-12);
    }

    #[test]
    fn field_of_identity_is_distance_to_one() {
        let grid = GridSpec::new(0.0, 2.0, -1.0, 1.0, 21, 17).unwrap();
        let field = compute_field(&Matrix::identity(2), &grid).unwrap();
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let want = (grid.node(i, j) - C64::new(1.0, 0.0)).norm();
                assert!((field.value(i, j) - want).abs() < 1e-9);
            }
        }
        assert_eq!(field.source_dim, 2);
    }

    #[test]
    fn field_node_examples() {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 5, 5).unwrap();
        let field = compute_field(&Matrix::diag(&[0.5, -0.5]).unwrap(), &grid).unwrap();
        assert!((field.value(2, 2) - 0.5).abs() < 1e-12);

        let field = compute_field(&jordan(), &grid).unwrap();
        assert!((field.value(3, 2) - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!(field.value(2, 2) < 1e-8);
    }

    #[test]
    fn accelerated_path_matches_svd() {
        let w = Matrix::from_rows(&[
            vec![0.2, 1.5, -0.3, 0.0],
            vec![0.0, -0.4, 0.8, 2.0],
            vec![0.1, 0.0, 0.5, -1.0],
            vec![0.7, 0.2, 0.0, 0.1],
        ])
        .unwrap();
        let grid = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 23, 19).unwrap();
        let base = compute_field(&w, &grid).unwrap();
        let fast = compute_field_with(
            &w,
            &grid,
            FieldOptions {
                method: FieldMethod::SchurInverseIteration,
                workers: None,
            },
        )
        .unwrap();
        for (a, b) in base.values.iter().zip(&fast.values) {
            assert!((a - b).abs() <= 1e-6 * a.max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn area_proxy_counts_nodes() {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 3, 3).unwrap();
        let field = compute_field(&Matrix::diag(&[0.0]).unwrap(), &grid).unwrap();
        assert_eq!(field.nodes_within(0.5), 1);
        assert_eq!(field.nodes_within(1.0), 5);
        assert_eq!(field.nodes_within(2.0), 9);
        assert_eq!(field.nodes_in(0.5).next().unwrap().2, C64::new(0.0, 0.0));
    }
}
