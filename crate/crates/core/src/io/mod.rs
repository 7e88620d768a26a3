//! File formats: the binary matrix container, numeric CSV matrices and
//! MNIST IDX files (the latter in [`crate::rnn::data`]).

pub mod container;
pub mod csv;

use std::path::Path;

pub use container::{ContainerError, MatrixFile};
pub use csv::{parse_matrix_csv, parse_matrix_csv_str, write_matrix_csv, CsvError};

use crate::matrix::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Container {
        path: String,
        source: ContainerError,
    },
    #[error("{path}: {source}")]
    Csv { path: String, source: CsvError },
}

/// Loads a matrix from a `.pspc` container or a numeric CSV file, chosen by
/// the leading magic bytes. Returns the matrix and its embedded name, if any.
pub fn load_matrix(path: &Path) -> Result<(Matrix, Option<String>), LoadError> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: shown.clone(),
        source,
    })?;
    if bytes.starts_with(container::MAGIC) {
        let file = MatrixFile::from_bytes(&bytes).map_err(|source| LoadError::Container {
            path: shown,
            source,
        })?;
        Ok((file.matrix, file.name))
    } else {
        let text = String::from_utf8(bytes).map_err(|e| LoadError::Csv {
            path: shown.clone(),
            source: CsvError::NotUtf8 {
                offset: e.utf8_error().valid_up_to(),
            },
        })?;
        let m = parse_matrix_csv_str(&text).map_err(|source| LoadError::Csv { path: shown, source })?;
        Ok((m, None))
    }
}
