//! Real matrices as comma-separated text, one row per line.

use std::path::Path;

use crate::matrix::{Matrix, MatrixError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsvError {
    #[error("no matrix rows found")]
    Empty,
    #[error("line {line} (byte {offset}): expected {expected} columns, found {found}")]
    Ragged {
        line: usize,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column} (byte {offset}): `{token}` is not a number")]
    BadToken {
        line: usize,
        column: usize,
        offset: usize,
        token: String,
    },
    #[error("byte {offset}: input is not valid UTF-8")]
    NotUtf8 { offset: usize },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub fn parse_matrix_csv_str(text: &str) -> Result<Matrix, CsvError> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    let mut line_start = 0;
    for (idx, raw) in text.split_inclusive('\n').enumerate() {
        let line_no = idx + 1;
        let offset = line_start;
        line_start += raw.len();
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        let start = data.len();
        let mut token_start = offset;
        for (c, field) in line.split(',').enumerate() {
            let token = field.trim();
            let value: f64 = token.parse().map_err(|_| CsvError::BadToken {
                line: line_no,
                column: c + 1,
                offset: token_start + (field.len() - field.trim_start().len()),
                token: token.to_string(),
            })?;
            data.push(value);
            token_start += field.len() + 1;
        }
        let found = data.len() - start;
        match cols {
            None => cols = Some(found),
            Some(expected) if expected != found => {
                return Err(CsvError::Ragged {
                    line: line_no,
                    offset,
                    expected,
                    found,
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(CsvError::Empty)?;
    Ok(Matrix::from_real(rows, cols, &data)?)
}

pub fn parse_matrix_csv(path: &Path) -> Result<Matrix, CsvError> {
    let text = std::fs::read_to_string(path).map_err(|e| CsvError::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_csv_str(&text)
}

/// Real parts, shortest round-trip formatting.
pub fn write_matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:?}", m.get(i, j).re)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_identity() {
        assert_eq!(parse_matrix_csv_str("1,0\n0,1\n").unwrap(), Matrix::identity(2));
    }

    #[test]
    fn ragged_row_reports_line() {
        assert_eq!(
            parse_matrix_csv_str("1,2\n3\n"),
            Err(CsvError::Ragged {
                line: 2,
                offset: 4,
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn literal_parse() {
        let m = parse_matrix_csv_str("1e0,2.5\n-3,4\n").unwrap();
        assert_eq!(m, Matrix::from_rows(&[vec![1.0, 2.5], vec![-3.0, 4.0]]).unwrap());
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse_matrix_csv_str(""), Err(CsvError::Empty));
        assert_eq!(parse_matrix_csv_str("\n  \n"), Err(CsvError::Empty));
        assert!(matches!(
            parse_matrix_csv_str("1,x\n"),
            Err(CsvError::BadToken { line: 1, column: 2, offset: 2, .. })
        ));
        assert!(matches!(parse_matrix_csv_str("1,nan\n"), Err(CsvError::Matrix(_))));
    }

    #[test]
    fn write_then_parse() {
        let m = Matrix::from_rows(&[vec![0.1, -1e-300], vec![3.0, 2.0 / 3.0]]).unwrap();
        assert_eq!(parse_matrix_csv_str(&write_matrix_csv(&m)).unwrap(), m);
    }
}
