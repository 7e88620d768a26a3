use std::path::{Path, PathBuf};

use specto_core::io::LoadError;
use specto_core::pseudospectrum::{AutoGridError, KreissError};
use specto_core::report::AnalysisError;
use specto_core::rnn::{MnistError, TrainError};
use specto_core::stabilizer::StabilizeError;
use specto_core::MatrixError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Output { .. } => 1,
        }
    }

    pub fn output(path: &Path, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches the offending input's name to a matrix-level failure.
    pub fn matrix(context: &str, err: MatrixError) -> Self {
        match err {
            MatrixError::NoConvergence(_) | MatrixError::NonFinite { .. } => CliError::Numerical(format!("{context}: {err}")),
            _ => CliError::Input(format!("{context}: {err}")),
        }
    }

    pub fn analysis(context: &str, err: AnalysisError) -> Self {
        match err {
            AnalysisError::Matrix(e) | AnalysisError::Grid(AutoGridError::Matrix(e)) => Self::matrix(context, e),
            AnalysisError::Kreiss(KreissError::Matrix(e)) => Self::matrix(context, e),
            AnalysisError::DimensionMismatch(..) => CliError::Input(format!("{context}: {err}")),
            AnalysisError::Grid(_) | AnalysisError::Contour(_) | AnalysisError::Kreiss(_) => {
                CliError::Usage(format!("{context}: {err}"))
            }
        }
    }

    pub fn stabilize(context: &str, err: StabilizeError) -> Self {
        match err {
            StabilizeError::Matrix(e) => Self::matrix(context, e),
            StabilizeError::NotReal => CliError::Input(format!("{context}: {err}")),
            StabilizeError::Config(_) => CliError::Usage(format!("{context}: {err}")),
            StabilizeError::ZeroMatrix | StabilizeError::Collapsed(_) => {
                CliError::Numerical(format!("{context}: {err}"))
            }
        }
    }
}

impl From<LoadError> for CliError {
    fn from(err: LoadError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<MnistError> for CliError {
    fn from(err: MnistError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(err: TrainError) -> Self {
        match err {
            TrainError::Config(_) => CliError::Usage(err.to_string()),
            TrainError::TaskMismatch { .. } | TrainError::EmptyData | TrainError::Cell(_) => {
                CliError::Input(err.to_string())
            }
            TrainError::Matrix(e) => CliError::matrix("training", e),
            TrainError::Stabilize(e) => CliError::stabilize("training", e),
            TrainError::Diverged { .. } => CliError::Numerical(err.to_string()),
        }
    }
}
