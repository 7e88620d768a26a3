//! WebAssembly bindings behind the static demo page in `www/`.
//!
//! Every exported function takes matrix CSV text and returns a JSON string.
//! The plain-Rust `*_json` functions carry the logic so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use serde::Serialize;
use specto_core::io::csv::{parse_matrix_csv_str, write_matrix_csv, CsvError};
use specto_core::pseudospectrum::{auto_grid, kreiss_lower_bound, AutoGridError, KreissError};
use specto_core::report::svg::{compare_svg, portrait_svg, Panel};
use specto_core::report::{analyze_on_grid, compare_matrices, AnalysisConfig, AnalysisError, MatrixAnalysis};
use specto_core::stabilizer::{stabilize, StabilizeError, StabilizerConfig};
use specto_core::{Matrix, MatrixError};
use wasm_bindgen::prelude::*;

/// Largest matrix the page accepts; the field is computed on one thread.
pub const MAX_DIM: usize = 64;
/// Largest grid resolution per axis.
pub const MAX_NODES: usize = 300;
/// Longest power sequence for the transient-growth plot.
pub const MAX_STEPS: usize = 2000;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("matrix: {0}")]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Grid(#[from] AutoGridError),
    #[error(transparent)]
    Kreiss(#[from] KreissError),
    #[error(transparent)]
    Stabilize(#[from] StabilizeError),
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Serialize)]
pub struct Portrait {
    pub svg: String,
    pub analysis: MatrixAnalysis,
}

#[derive(Debug, Serialize)]
pub struct Stabilized {
    pub svg: String,
    pub gain_estimate: f64,
    pub before: MatrixAnalysis,
    pub after: MatrixAnalysis,
    /// The rescaled matrix as CSV, ready to paste back into the editor.
    pub matrix_csv: String,
}

#[derive(Debug, Serialize)]
pub struct Transient {
    /// `‖W^k‖₂` for `k = 0..=steps`.
    pub power_norms: Vec<f64>,
    pub peak: f64,
    pub peak_step: usize,
    pub spectral_radius: f64,
    pub kreiss_lower_bound: f64,
    /// `e·n` times the Kreiss lower bound.
    pub kreiss_upper_bound: f64,
}

fn parse(csv: &str) -> Result<Matrix, DemoError> {
    let w = parse_matrix_csv_str(csv)?;
    if !w.is_square() {
        let (r, c) = w.shape();
        return Err(DemoError::Input(format!("matrix must be square, got {r}×{c}")));
    }
    if w.rows() > MAX_DIM {
        return Err(DemoError::Input(format!("matrix order {} exceeds {MAX_DIM}", w.rows())));
    }
    Ok(w)
}

fn parse_levels(levels: &str) -> Result<Vec<f64>, DemoError> {
    let mut out = Vec::new();
    for token in levels.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: f64 = token
            .parse()
            .map_err(|_| DemoError::Input(format!("`{token}` is not a number")))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(DemoError::Input(format!("level {token} must be positive")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(DemoError::Input("no contour levels given".into()));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn config(nodes: usize, levels: &str) -> Result<AnalysisConfig, DemoError> {
    if !(3..=MAX_NODES).contains(&nodes) {
        return Err(DemoError::Input(format!("grid must have 3 to {MAX_NODES} nodes per axis")));
    }
    let levels = parse_levels(levels)?;
    Ok(AnalysisConfig {
        nx: nodes,
        ny: nodes,
        kreiss_eps: levels.clone(),
        levels,
        ..AnalysisConfig::default()
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo payloads serialize")
}

pub fn portrait_json(csv: &str, nodes: usize, levels: &str) -> Result<String, DemoError> {
    let w = parse(csv)?;
    let cfg = config(nodes, levels)?;
    let grid = auto_grid(&w, cfg.pad, cfg.nx, cfg.ny)?;
    let art = analyze_on_grid("W", &w, &grid, &cfg)?;
    let eigenvalues = art.analysis.eigenvalues_c64();
    let svg = portrait_svg(
        &Panel {
            title: "W",
            contours: &art.contours,
            eigenvalues: &eigenvalues,
        },
        &grid,
    );
    Ok(to_json(&Portrait {
        svg,
        analysis: art.analysis,
    }))
}

pub fn stabilize_json(csv: &str, iterations: usize, seed: u64, nodes: usize, levels: &str) -> Result<String, DemoError> {
    let w = parse(csv)?;
    if !w.is_real() {
        return Err(DemoError::Input("stabilization needs a real matrix".into()));
    }
    let cfg = config(nodes, levels)?;
    let s = stabilize(&w, &StabilizerConfig::with_iterations(iterations, seed))?;
    let (report, a, b) = compare_matrices(("W", &w), ("W_s", &s.w_s), &cfg)?;
    let (ea, eb) = (a.analysis.eigenvalues_c64(), b.analysis.eigenvalues_c64());
    let svg = compare_svg(
        &Panel {
            title: "before",
            contours: &a.contours,
            eigenvalues: &ea,
        },
        &Panel {
            title: "after",
            contours: &b.contours,
            eigenvalues: &eb,
        },
        &report.grid,
    );
    Ok(to_json(&Stabilized {
        svg,
        gain_estimate: s.gain_estimate,
        before: a.analysis,
        after: b.analysis,
        matrix_csv: write_matrix_csv(&s.w_s),
    }))
}

pub fn transient_json(csv: &str, steps: usize, nodes: usize, levels: &str) -> Result<String, DemoError> {
    let w = parse(csv)?;
    if !(1..=MAX_STEPS).contains(&steps) {
        return Err(DemoError::Input(format!("steps must be between 1 and {MAX_STEPS}")));
    }
    let cfg = config(nodes, levels)?;
    let grid = auto_grid(&w, cfg.pad, cfg.nx, cfg.ny)?;
    let field = specto_core::pseudospectrum::compute_field(&w, &grid)?;
    let lower = kreiss_lower_bound(&field, &cfg.kreiss_eps)?;
    let power_norms = w.power_norms(steps)?;
    let (peak_step, peak) = power_norms
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    Ok(to_json(&Transient {
        power_norms,
        peak,
        peak_step,
        spectral_radius: w.spectral_radius()?,
        kreiss_lower_bound: lower,
        kreiss_upper_bound: std::f64::consts::E * w.rows() as f64 * lower,
    }))
}

/// Example matrices offered by the page.
pub fn preset_csv(name: &str) -> Option<String> {
    let rows: Vec<Vec<f64>> = match name {
        "jordan" => {
            let n = 8;
            (0..n)
                .map(|i| (0..n).map(|j| if j == i { 0.5 } else if j == i + 1 { 1.0 } else { 0.0 }).collect())
                .collect()
        }
        "rotation" => {
            let (c, s) = (0.9 * 0.3f64.cos(), 0.9 * 0.3f64.sin());
            vec![vec![c, -s], vec![s, c]]
        }
        "grcar" => {
            let n = 12;
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| match j as isize - i as isize {
                            -1 => -0.25,
                            0..=3 => 0.25,
                            _ => 0.0,
                        })
                        .collect()
                })
                .collect()
        }
        "shear" => vec![vec![0.9, 5.0], vec![0.0, 0.8]],
        _ => return None,
    };
    Matrix::from_rows(&rows).ok().map(|m| write_matrix_csv(&m))
}

#[wasm_bindgen]
pub fn portrait(csv: &str, nodes: usize, levels: &str) -> Result<String, JsError> {
    portrait_json(csv, nodes, levels).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn stabilize_matrix(csv: &str, iterations: usize, seed: u32, nodes: usize, levels: &str) -> Result<String, JsError> {
    stabilize_json(csv, iterations, u64::from(seed), nodes, levels).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn transient(csv: &str, steps: usize, nodes: usize, levels: &str) -> Result<String, JsError> {
    transient_json(csv, steps, nodes, levels).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn preset(name: &str) -> Option<String> {
    preset_csv(name)
}
