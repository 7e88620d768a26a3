//! Binary matrix container.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                              |
//! |--------|------|------------------------------------|
//! | 0      | 4    | magic `PSPC`                       |
//! | 4      | 2    | format version (1)                 |
//! | 6      | 2    | flags, bit 0 = complex             |
//! | 8      | 4    | rows                               |
//! | 12     | 4    | cols                               |
//! | 16     | …    | `rows × cols` f64, row-major; complex entries as `re, im` pairs |
//!
//! An optional footer follows the payload: a u32 byte length and that many
//! bytes of UTF-8 name. Anything else after the payload is rejected.

use crate::matrix::{Matrix, C64};

pub const MAGIC: &[u8; 4] = b"PSPC";
pub const VERSION: u16 = 1;
pub const FLAG_COMPLEX: u16 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContainerError {
    #[error("byte 0: missing PSPC magic")]
    BadMagic,
    #[error("byte {offset}: file ends early, {needed} bytes required")]
    Truncated { offset: usize, needed: usize },
    #[error("byte 4: unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("byte 6: unknown flag bits 0x{0:04x}")]
    UnknownFlags(u16),
    #[error("byte 8: zero dimension {rows}x{cols}")]
    ZeroDimension { rows: u32, cols: u32 },
    #[error("byte {offset}: non-finite value")]
    NonFinite { offset: usize },
    #[error("byte {offset}: {extra} unexpected trailing bytes")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("byte {offset}: name footer is not valid UTF-8")]
    BadName { offset: usize },
    #[error("matrix too large for the container format")]
    TooLarge,
}

/// A decoded container: the matrix, whether it was stored as complex, and
/// the optional name footer.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub matrix: Matrix,
    pub complex: bool,
    pub name: Option<String>,
}

fn u16_at(b: &[u8], o: usize) -> u16 {
    u16::from_le_bytes([b[o], b[o + 1]])
}

fn u32_at(b: &[u8], o: usize) -> u32 {
    u32::from_le_bytes([b[o], b[o + 1], b[o + 2], b[o + 3]])
}

fn f64_at(b: &[u8], o: usize) -> Result<f64, ContainerError> {
    let mut raw = [0u8; 8];
    raw.copy_from_slice(&b[o..o + 8]);
    let v = f64::from_le_bytes(raw);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ContainerError::NonFinite { offset: o })
    }
}

impl MatrixFile {
    /// Stores real matrices as real and anything with an imaginary part as
    /// complex.
    pub fn new(matrix: Matrix, name: Option<String>) -> Self {
        let complex = !matrix.is_real();
        Self { matrix, complex, name }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContainerError> {
        if bytes.len() < HEADER_LEN {
            if !MAGIC.starts_with(&bytes[..bytes.len().min(4)]) {
                return Err(ContainerError::BadMagic);
            }
            return Err(ContainerError::Truncated {
                offset: bytes.len(),
                needed: HEADER_LEN,
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let version = u16_at(bytes, 4);
        if version != VERSION {
            return Err(ContainerError::UnsupportedVersion(version));
        }
        let flags = u16_at(bytes, 6);
        if flags & !FLAG_COMPLEX != 0 {
            return Err(ContainerError::UnknownFlags(flags));
        }
        let complex = flags & FLAG_COMPLEX != 0;
        let rows = u32_at(bytes, 8);
        let cols = u32_at(bytes, 12);
        if rows == 0 || cols == 0 {
            return Err(ContainerError::ZeroDimension { rows, cols });
        }
        let per_entry = if complex { 16 } else { 8 };
        let payload = (rows as usize)
            .checked_mul(cols as usize)
            .and_then(|n| n.checked_mul(per_entry))
            .ok_or(ContainerError::TooLarge)?;
        let end = HEADER_LEN + payload;
        if bytes.len() < end {
            return Err(ContainerError::Truncated {
                offset: bytes.len(),
                needed: end,
            });
        }
        let count = rows as usize * cols as usize;
        let mut data = Vec::with_capacity(count);
        for k in 0..count {
            let o = HEADER_LEN + k * per_entry;
            let re = f64_at(bytes, o)?;
            let im = if complex { f64_at(bytes, o + 8)? } else { 0.0 };
            data.push(C64::new(re, im));
        }
        let name = Self::read_footer(bytes, end)?;
        let matrix = Matrix::from_complex(rows as usize, cols as usize, &data)
            .expect("entries validated above");
        Ok(Self { matrix, complex, name })
    }

    fn read_footer(bytes: &[u8], end: usize) -> Result<Option<String>, ContainerError> {
        let rest = &bytes[end..];
        if rest.is_empty() {
            return Ok(None);
        }
        if rest.len() < 4 {
            return Err(ContainerError::TrailingBytes {
                offset: end,
                extra: rest.len(),
            });
        }
        let len = u32_at(bytes, end) as usize;
        let name_start = end + 4;
        match rest.len() - 4 {
            n if n < len => Err(ContainerError::Truncated {
                offset: bytes.len(),
                needed: name_start + len,
            }),
            n if n > len => Err(ContainerError::TrailingBytes {
                offset: name_start + len,
                extra: n - len,
            }),
            _ => std::str::from_utf8(&bytes[name_start..])
                .map(|s| Some(s.to_string()))
                .map_err(|e| ContainerError::BadName {
                    offset: name_start + e.valid_up_to(),
                }),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ContainerError> {
        let (rows, cols) = self.matrix.shape();
        let rows32 = u32::try_from(rows).map_err(|_| ContainerError::TooLarge)?;
        let cols32 = u32::try_from(cols).map_err(|_| ContainerError::TooLarge)?;
        let per_entry = if self.complex { 16 } else { 8 };
        let mut out = Vec::with_capacity(HEADER_LEN + rows * cols * per_entry);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        let flags = if self.complex { FLAG_COMPLEX } else { 0 };
        out.extend_from_slice(&flags.to_le_bytes());
        out.extend_from_slice(&rows32.to_le_bytes());
        out.extend_from_slice(&cols32.to_le_bytes());
        for z in self.matrix.entries() {
            out.extend_from_slice(&z.re.to_le_bytes());
            if self.complex {
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        if let Some(name) = &self.name {
            let len = u32::try_from(name.len()).map_err(|_| ContainerError::TooLarge)?;
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(name.as_bytes());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> MatrixFile {
        MatrixFile::new(
            Matrix::from_rows(&[vec![1.0, -2.5], vec![0.0, 3.25]]).unwrap(),
            Some("recurrent".into()),
        )
    }

    #[test]
    fn header_layout() {
        let bytes = sample().to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"PSPC");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &[2, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(bytes.len(), 16 + 32 + 4 + 9);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), -2.5);
    }

    #[test]
    fn complex_payload_is_interleaved() {
        let m = Matrix::from_complex(1, 1, &[C64::new(1.5, -0.5)]).unwrap();
        let bytes = MatrixFile::new(m.clone(), None).to_bytes().unwrap();
        assert_eq!(u16_at(&bytes, 6), FLAG_COMPLEX);
        assert_eq!(bytes.len(), 32);
        assert_eq!(MatrixFile::from_bytes(&bytes).unwrap().matrix, m);
    }

    #[test]
    fn rejects_malformed_files() {
        let good = sample().to_bytes().unwrap();
        assert_eq!(MatrixFile::from_bytes(b"NOPE0000000000000000"), Err(ContainerError::BadMagic));
        assert!(matches!(
            MatrixFile::from_bytes(&good[..20]),
            Err(ContainerError::Truncated { offset: 20, needed: 48 })
        ));
        let mut v = good.clone();
        v[4] = 2;
        assert_eq!(MatrixFile::from_bytes(&v), Err(ContainerError::UnsupportedVersion(2)));
        let mut v = good.clone();
        v[6] = 4;
        assert_eq!(MatrixFile::from_bytes(&v), Err(ContainerError::UnknownFlags(4)));
        let mut v = good.clone();
        v[8] = 0;
        assert!(matches!(MatrixFile::from_bytes(&v), Err(ContainerError::ZeroDimension { .. })));
        let mut v = good.clone();
        v.push(0);
        assert!(matches!(MatrixFile::from_bytes(&v), Err(ContainerError::TrailingBytes { .. })));
        let mut v = good[..48].to_vec();
        v.extend_from_slice(&[1, 2]);
        assert_eq!(
            MatrixFile::from_bytes(&v),
            Err(ContainerError::TrailingBytes { offset: 48, extra: 2 })
        );
        let mut v = good.clone();
        v[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
        assert_eq!(MatrixFile::from_bytes(&v), Err(ContainerError::NonFinite { offset: 16 }));
        let mut v = good[..48].to_vec();
        v.extend_from_slice(&[1, 0, 0, 0, 0xff]);
        assert_eq!(MatrixFile::from_bytes(&v), Err(ContainerError::BadName { offset: 52 }));
    }

    proptest! {
        #[test]
        fn write_read_write_is_identity(
            rows in 1usize..5,
            cols in 1usize..5,
            complex in any::<bool>(),
            seed in prop::collection::vec(-1e6f64..1e6, 32),
            name in proptest::option::of("[a-z0-9_-]{0,12}"),
        ) {
            let data: Vec<C64> = (0..rows * cols)
                .map(|k| C64::new(seed[k % 32], if complex { seed[(k + 7) % 32] } else { 0.0 }))
                .collect();
            let file = MatrixFile {
                matrix: Matrix::from_complex(rows, cols, &data).unwrap(),
                complex,
                name,
            };
            let bytes = file.to_bytes().unwrap();
            let back = MatrixFile::from_bytes(&bytes).unwrap();
            prop_assert_eq!(&back, &file);
            prop_assert_eq!(back.to_bytes().unwrap(), bytes);
        }
    }
}
