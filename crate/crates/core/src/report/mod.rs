//! Analysis pipeline and its serialized outputs: JSON reports, contour CSV
//! and SVG spectral portraits.

pub mod json;
pub mod svg;

use serde::{Deserialize, Serialize};

use crate::matrix::{Matrix, MatrixError, C64};
use crate::pseudospectrum::{
    self, auto_grid, compute_field_with, extract_contours, kreiss_lower_bound, AutoGridError, ContourError,
    ContourSet, FieldMethod, FieldOptions, GridSpec, KreissError, PseudospectrumField,
};
use crate::rnn::TrainConfig;
use crate::spectral::{spectral_report, SpectralReport};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Grid(#[from] AutoGridError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Kreiss(#[from] KreissError),
    #[error("matrices must have the same shape: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
}

/// Grid and level settings, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub nx: usize,
    pub ny: usize,
    pub pad: f64,
    /// Contour levels ε, strictly increasing.
    pub levels: Vec<f64>,
    /// ε values sampled for the Kreiss lower bound.
    pub kreiss_eps: Vec<f64>,
    pub method: FieldMethod,
    /// Worker threads for field evaluation; not part of the output.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let levels = pseudospectrum::default_levels();
        Self {
            nx: pseudospectrum::DEFAULT_GRID_NODES,
            ny: pseudospectrum::DEFAULT_GRID_NODES,
            pad: pseudospectrum::DEFAULT_PAD,
            kreiss_eps: levels.clone(),
            levels,
            method: FieldMethod::Svd,
            workers: None,
        }
    }
}

impl AnalysisConfig {
    fn field_options(&self) -> FieldOptions {
        FieldOptions {
            method: self.method,
            workers: self.workers,
        }
    }
}

/// One matrix's entry in an [`AnalysisReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixAnalysis {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub spectral_radius: f64,
    pub spectral_norm: f64,
    pub henrici: f64,
    pub schur_departure: f64,
    pub kreiss_lower_bound: Option<f64>,
    /// Spectral radius inside the closed unit disk.
    pub stable: bool,
    pub grid: Option<GridSpec>,
    pub levels: Vec<f64>,
    /// Polyline count per level.
    pub contour_polylines: Vec<usize>,
}

impl MatrixAnalysis {
    /// Entry without pseudospectral data.
    pub fn from_spectral(name: &str, shape: (usize, usize), report: &SpectralReport) -> Self {
        Self {
            name: name.to_string(),
            rows: shape.0,
            cols: shape.1,
            eigenvalues: report.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            spectral_radius: report.spectral_radius,
            spectral_norm: report.spectral_norm,
            henrici: report.henrici,
            schur_departure: report.schur_departure,
            kreiss_lower_bound: report.kreiss_lower_bound,
            stable: report.is_stable(),
            grid: None,
            levels: Vec::new(),
            contour_polylines: Vec::new(),
        }
    }

    pub fn eigenvalues_c64(&self) -> Vec<C64> {
        self.eigenvalues.iter().map(|[re, im]| C64::new(*re, *im)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub toolkit_version: String,
    pub config: AnalysisConfig,
    pub matrices: Vec<MatrixAnalysis>,
    /// Training settings, for reports written during training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainConfig>,
    /// Only recorded on request; its presence makes output non-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl AnalysisReport {
    pub fn new(config: AnalysisConfig) -> Self {
        Self {
            toolkit_version: crate::VERSION.to_string(),
            config,
            matrices: Vec::new(),
            training: None,
            wall_time_s: None,
        }
    }
}

/// Everything computed for one matrix.
#[derive(Debug, Clone)]
pub struct MatrixArtifacts {
    pub analysis: MatrixAnalysis,
    pub field: PseudospectrumField,
    pub contours: ContourSet,
}

/// Full analysis of one square matrix on an automatically sized grid.
pub fn analyze_matrix(name: &str, w: &Matrix, cfg: &AnalysisConfig) -> Result<MatrixArtifacts, AnalysisError> {
    let grid = auto_grid(w, cfg.pad, cfg.nx, cfg.ny)?;
    analyze_on_grid(name, w, &grid, cfg)
}

/// Full analysis on a caller-chosen grid.
pub fn analyze_on_grid(
    name: &str,
    w: &Matrix,
    grid: &GridSpec,
    cfg: &AnalysisConfig,
) -> Result<MatrixArtifacts, AnalysisError> {
    let mut spectral = spectral_report(w)?;
    let field = compute_field_with(w, grid, cfg.field_options())?;
    let contours = extract_contours(&field, &cfg.levels)?;
    spectral.kreiss_lower_bound = Some(kreiss_lower_bound(&field, &cfg.kreiss_eps)?);
    let mut analysis = MatrixAnalysis::from_spectral(name, w.shape(), &spectral);
    analysis.grid = Some(*grid);
    analysis.levels = cfg.levels.clone();
    analysis.contour_polylines = contours.polylines.iter().map(Vec::len).collect();
    Ok(MatrixArtifacts {
        analysis,
        field,
        contours,
    })
}

/// `level,polyline_id,re,im` rows; polyline ids restart at 0 for each level.
pub fn contours_csv(contours: &ContourSet) -> String {
    let mut out = String::from("level,polyline_id,re,im\n");
    for (level, lines) in contours.iter() {
        for (id, line) in lines.iter().enumerate() {
            for p in &line.points {
                out.push_str(&format!("{level},{id},{},{}\n", p.re, p.im));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub name: String,
    pub henrici: f64,
    pub spectral_radius: f64,
    pub spectral_norm: f64,
    pub schur_departure: f64,
    pub stable: bool,
}

impl From<&MatrixAnalysis> for MatrixSummary {
    fn from(a: &MatrixAnalysis) -> Self {
        Self {
            name: a.name.clone(),
            henrici: a.henrici,
            spectral_radius: a.spectral_radius,
            spectral_norm: a.spectral_norm,
            schur_departure: a.schur_departure,
            stable: a.stable,
        }
    }
}

/// Grid-node counts inside the ε-pseudospectrum, before and after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaDelta {
    pub level: f64,
    pub before_nodes: usize,
    pub after_nodes: usize,
    /// `after / before`; absent when `before` is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub toolkit_version: String,
    pub config: AnalysisConfig,
    pub grid: GridSpec,
    pub before: MatrixSummary,
    pub after: MatrixSummary,
    /// `henrici(after) − henrici(before)`.
    pub henrici_delta: f64,
    pub spectral_radius_delta: f64,
    pub areas: Vec<AreaDelta>,
}

/// Analyses both matrices on one shared grid.
pub fn compare_matrices(
    before: (&str, &Matrix),
    after: (&str, &Matrix),
    cfg: &AnalysisConfig,
) -> Result<(CompareReport, MatrixArtifacts, MatrixArtifacts), AnalysisError> {
    if before.1.shape() != after.1.shape() {
        return Err(AnalysisError::DimensionMismatch(before.1.shape(), after.1.shape()));
    }
    let grid = auto_grid(before.1, cfg.pad, cfg.nx, cfg.ny)?.union(&auto_grid(after.1, cfg.pad, cfg.nx, cfg.ny)?);
    let a = analyze_on_grid(before.0, before.1, &grid, cfg)?;
    let b = analyze_on_grid(after.0, after.1, &grid, cfg)?;
    let areas = cfg
        .levels
        .iter()
        .map(|&level| {
            let before_nodes = a.field.nodes_within(level);
            let after_nodes = b.field.nodes_within(level);
            AreaDelta {
                level,
                before_nodes,
                after_nodes,
                ratio: (before_nodes > 0).then(|| after_nodes as f64 / before_nodes as f64),
            }
        })
        .collect();
    let report = CompareReport {
        toolkit_version: crate::VERSION.to_string(),
        config: cfg.clone(),
        grid,
        before: MatrixSummary::from(&a.analysis),
        after: MatrixSummary::from(&b.analysis),
        henrici_delta: b.analysis.henrici - a.analysis.henrici,
        spectral_radius_delta: b.analysis.spectral_radius - a.analysis.spectral_radius,
        areas,
    };
    Ok((report, a, b))
}
