//! Spectrum stabilization by alternating power iteration.
//!
//! Starting from a Gaussian vector `u₀`, each step computes
//! `v ← Wᵀu / ‖Wᵀu‖` and `u ← Wv / ‖Wv‖`; the weight matrix is then divided
//! by `uᵀWv`, the current estimate of its largest singular value. Since the
//! spectral radius never exceeds the largest singular value, the rescaled
//! matrix has its spectrum inside the closed unit disk once the estimate
//! has converged. Rescaling leaves eigenvectors and the Henrici index
//! untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::matrix::{Matrix, MatrixError};

const MAX_RESTARTS: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilizeError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("stabilization requires a real matrix")]
    NotReal,
    #[error("cannot stabilize the zero matrix")]
    ZeroMatrix,
    #[error("invalid stabilizer configuration: {0}")]
    Config(String),
    #[error("power iteration collapsed to zero after {0} restarts")]
    Collapsed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerConfig {
    /// Number of power iterations, at least 1.
    pub iterations: usize,
    pub seed: u64,
    /// Standard deviation of the random start vector.
    pub sigma0: f64,
    /// Explicit start vector; replaces the random draw for the first attempt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected_u0: Option<Vec<f64>>,
}

impl Default for StabilizerConfig {
    fn default() -> Self {
        Self {
            iterations: 1,
            seed: 0,
            sigma0: 1.0,
            injected_u0: None,
        }
    }
}

impl StabilizerConfig {
    pub fn with_iterations(iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self, rows: usize) -> Result<(), StabilizeError> {
        if self.iterations == 0 {
            return Err(StabilizeError::Config("iterations must be at least 1".into()));
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(StabilizeError::Config("sigma0 must be positive".into()));
        }
        if let Some(u0) = &self.injected_u0 {
            if u0.len() != rows {
                return Err(StabilizeError::Config(format!(
                    "start vector has length {}, matrix has {rows} rows",
                    u0.len()
                )));
            }
            if norm(u0) == 0.0 || !u0.iter().all(|x| x.is_finite()) {
                return Err(StabilizeError::Config("start vector must be finite and nonzero".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationResult {
    /// `W / gain_estimate`.
    pub w_s: Matrix,
    /// `|uᵀWv|` after the final iteration.
    pub gain_estimate: f64,
    pub u_final: Vec<f64>,
    pub v_final: Vec<f64>,
}

/// Real row-major square matrix with the two products the iteration needs.
struct Dense {
    n: usize,
    data: Vec<f64>,
}

impl Dense {
    fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn mul_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(&self.data[i * self.n..(i + 1) * self.n]) {
                *o += a * xi;
            }
        }
        out
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(mut x: Vec<f64>, len: f64) -> Vec<f64> {
    x.iter_mut().for_each(|v| *v /= len);
    x
}

/// Gain after every step, then the final `u` and `v`.
type Trace = (Vec<f64>, Vec<f64>, Vec<f64>);

fn iterate(w: &Matrix, cfg: &StabilizerConfig) -> Result<Trace, StabilizeError> {
    let n = w.require_square()?;
    if !w.is_real() {
        return Err(StabilizeError::NotReal);
    }
    if w.frobenius_norm() == 0.0 {
        return Err(StabilizeError::ZeroMatrix);
    }
    cfg.validate(n)?;
    let dense = Dense {
        n,
        data: w.real_parts(),
    };
    let normal = Normal::new(0.0, cfg.sigma0).map_err(|e| StabilizeError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    'restart: for attempt in 0..=MAX_RESTARTS {
        let mut u: Vec<f64> = match (&cfg.injected_u0, attempt) {
            (Some(u0), 0) => u0.clone(),
            _ => (0..n).map(|_| normal.sample(&mut rng)).collect(),
        };
        let mut v = vec![0.0; n];
        let mut gains = Vec::with_capacity(cfg.iterations);
        for _ in 0..cfg.iterations {
            let wtu = dense.mul_transpose(&u);
            let len = norm(&wtu);
            if len == 0.0 {
                continue 'restart;
            }
            v = unit(wtu, len);
            let wv = dense.mul(&v);
            let len = norm(&wv);
            if len == 0.0 {
                continue 'restart;
            }
            u = unit(wv, len);
            gains.push(dot(&u, &dense.mul(&v)).abs());
        }
        return Ok((gains, u, v));
    }
    Err(StabilizeError::Collapsed(MAX_RESTARTS))
}

/// Rescales `w` by its power-iteration gain estimate.
pub fn stabilize(w: &Matrix, cfg: &StabilizerConfig) -> Result<StabilizationResult, StabilizeError> {
    let (gains, u_final, v_final) = iterate(w, cfg)?;
    let gain_estimate = *gains.last().expect("at least one iteration");
    Ok(StabilizationResult {
        w_s: w.scale(1.0 / gain_estimate),
        gain_estimate,
        u_final,
        v_final,
    })
}

/// Gain estimate after each of `m_max` iterations from the same start.
pub fn gain_convergence(
    w: &Matrix,
    cfg: &StabilizerConfig,
    m_max: usize,
) -> Result<Vec<f64>, StabilizeError> {
    let cfg = StabilizerConfig {
        iterations: m_max,
        ..cfg.clone()
    };
    Ok(iterate(w, &cfg)?.0)
}
