use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use specto_core::io::{load_matrix, ContainerError, MatrixFile};
use specto_core::pseudospectrum::{self, FieldMethod};
use specto_core::report::AnalysisConfig;
use specto_core::Matrix;

use crate::error::CliError;

pub const THREADS_ENV: &str = "SPECTO_THREADS";

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Grid nodes per axis.
    #[arg(long, default_value_t = pseudospectrum::DEFAULT_GRID_NODES)]
    pub grid: usize,
    /// Nodes along the real axis (overrides --grid).
    #[arg(long)]
    pub nx: Option<usize>,
    /// Nodes along the imaginary axis (overrides --grid).
    #[arg(long)]
    pub ny: Option<usize>,
    /// Padding around the eigenvalue and unit-disk box.
    #[arg(long, default_value_t = pseudospectrum::DEFAULT_PAD)]
    pub pad: f64,
    /// Contour levels, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// ε values for the Kreiss lower bound (default: the contour levels).
    #[arg(long, value_delimiter = ',')]
    pub kreiss_eps: Option<Vec<f64>>,
    /// Schur reduction plus inverse iteration instead of a full SVD per node.
    #[arg(long)]
    pub accelerated: bool,
}

impl GridArgs {
    pub fn config(&self) -> Result<AnalysisConfig, CliError> {
        let levels = self.eps.clone().unwrap_or_else(pseudospectrum::default_levels);
        if !(self.pad.is_finite() && self.pad >= 0.0) {
            return Err(CliError::Usage(format!("--pad must be finite and non-negative, got {}", self.pad)));
        }
        Ok(AnalysisConfig {
            nx: self.nx.unwrap_or(self.grid),
            ny: self.ny.unwrap_or(self.grid),
            pad: self.pad,
            kreiss_eps: self.kreiss_eps.clone().unwrap_or_else(|| levels.clone()),
            levels,
            method: if self.accelerated {
                FieldMethod::SchurInverseIteration
            } else {
                FieldMethod::Svd
            },
            workers: worker_count()?,
        })
    }
}

/// Worker cap from the environment; `None` means machine parallelism.
pub fn worker_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Restricts a label to characters that are safe in file names.
pub fn sanitize(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if cleaned.is_empty() {
        "matrix".to_string()
    } else {
        cleaned
    }
}

/// Loads every input and gives each a distinct file-safe name, taken from
/// the container footer or else the file stem.
pub fn load_named(paths: &[PathBuf]) -> Result<Vec<(String, Matrix)>, CliError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let (matrix, embedded) = load_matrix(path)?;
        let base = sanitize(&embedded.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        }));
        let mut name = base.clone();
        let mut k = 2;
        while !seen.insert(name.clone()) {
            name = format!("{base}-{k}");
            k += 1;
        }
        out.push((name, matrix));
    }
    Ok(out)
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::output(path, e))
}

pub fn write_container(path: &Path, matrix: Matrix, name: &str) -> Result<(), CliError> {
    let bytes = MatrixFile::new(matrix, Some(name.to_string()))
        .to_bytes()
        .map_err(|e: ContainerError| CliError::Input(format!("{}: {e}", path.display())))?;
    write_file(path, bytes)
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    specto_core::report::json::to_json_string(value).expect("report types serialize infallibly")
}
