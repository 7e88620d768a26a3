//! Datasets: the two-channel adding problem and MNIST read row by row.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cell::Target;
use super::Task;

pub const MNIST_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const MNIST_LABEL_MAGIC: u32 = 0x0000_0801;
pub const MNIST_SIDE: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// `seq_len × input_dim`, row-major (one row per time step).
    pub steps: Vec<f64>,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub task: Task,
    pub input_dim: usize,
    pub seq_len: usize,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// First `n` samples and the rest.
    pub fn split_at(mut self, n: usize) -> (Dataset, Dataset) {
        let rest = self.samples.split_off(n.min(self.samples.len()));
        let tail = Dataset {
            samples: rest,
            ..self.clone_header()
        };
        (self, tail)
    }

    /// First `n` samples.
    pub fn truncated(mut self, n: usize) -> Dataset {
        self.samples.truncate(n);
        self
    }

    fn clone_header(&self) -> Dataset {
        Dataset {
            task: self.task,
            input_dim: self.input_dim,
            seq_len: self.seq_len,
            samples: Vec::new(),
        }
    }
}

/// Adding-problem sequences. Channel 0 holds uniform values in `[0, 1)`,
/// channel 1 marks exactly two distinct positions; the target is the sum of
/// the two marked values.
///
/// # Panics
/// If `seq_len < 2`.
pub fn generate_adding(n: usize, seq_len: usize, seed: u64) -> Dataset {
    assert!(seq_len >= 2, "adding sequences need at least two steps");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let mut steps = vec![0.0; 2 * seq_len];
            for t in 0..seq_len {
                steps[2 * t] = rng.gen::<f64>();
            }
            let marks = sample(&mut rng, seq_len, 2);
            let mut sum = 0.0;
            for t in marks.iter() {
                steps[2 * t + 1] = 1.0;
                sum += steps[2 * t];
            }
            Sample {
                steps,
                target: Target::Value(sum),
            }
        })
        .collect();
    Dataset {
        task: Task::Adding,
        input_dim: 2,
        seq_len,
        samples,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MnistError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: bad magic 0x{found:08x}, expected 0x{expected:08x}")]
    BadMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("{path}: truncated at byte {offset}, header promises {expected} bytes")]
    Truncated {
        path: PathBuf,
        offset: usize,
        expected: usize,
    },
    #[error("{path}: images are {rows}x{cols}, expected 28x28")]
    BadImageShape { path: PathBuf, rows: u32, cols: u32 },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: label {label} at index {index} is not a digit")]
    BadLabel {
        path: PathBuf,
        index: usize,
        label: u8,
    },
}

fn read_u32(bytes: &[u8], offset: usize, path: &Path, expected: usize) -> Result<u32, MnistError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| MnistError::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len(),
            expected,
        })
}

fn read_file(path: &Path) -> Result<Vec<u8>, MnistError> {
    fs::read(path).map_err(|source| MnistError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses an IDX image file into row-per-step sequences scaled to `[0, 1]`.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<Vec<Vec<f64>>, MnistError> {
    let magic = read_u32(bytes, 0, path, 16)?;
    if magic != MNIST_IMAGE_MAGIC {
        return Err(MnistError::BadMagic {
            path: path.to_path_buf(),
            found: magic,
            expected: MNIST_IMAGE_MAGIC,
        });
    }
    let count = read_u32(bytes, 4, path, 16)? as usize;
    let rows = read_u32(bytes, 8, path, 16)?;
    let cols = read_u32(bytes, 12, path, 16)?;
    if rows as usize != MNIST_SIDE || cols as usize != MNIST_SIDE {
        return Err(MnistError::BadImageShape {
            path: path.to_path_buf(),
            rows,
            cols,
        });
    }
    let pixels = MNIST_SIDE * MNIST_SIDE;
    let expected = 16 + count * pixels;
    if bytes.len() < expected {
        return Err(MnistError::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len(),
            expected,
        });
    }
    Ok(bytes[16..expected]
        .chunks_exact(pixels)
        .map(|img| img.iter().map(|&p| f64::from(p) / 255.0).collect())
        .collect())
}

/// Parses an IDX label file.
pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>, MnistError> {
    let magic = read_u32(bytes, 0, path, 8)?;
    if magic != MNIST_LABEL_MAGIC {
        return Err(MnistError::BadMagic {
            path: path.to_path_buf(),
            found: magic,
            expected: MNIST_LABEL_MAGIC,
        });
    }
    let count = read_u32(bytes, 4, path, 8)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(MnistError::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len(),
            expected,
        });
    }
    let labels = bytes[8..expected].to_vec();
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l > 9) {
        return Err(MnistError::BadLabel {
            path: path.to_path_buf(),
            index,
            label,
        });
    }
    Ok(labels)
}

/// Loads an MNIST image/label pair. Each image becomes a 28-step sequence
/// whose step `i` is pixel row `i`.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, MnistError> {
    let images = parse_idx_images(&read_file(images_path)?, images_path)?;
    let labels = parse_idx_labels(&read_file(labels_path)?, labels_path)?;
    if images.len() != labels.len() {
        return Err(MnistError::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok(Dataset {
        task: Task::SeqMnist,
        input_dim: MNIST_SIDE,
        seq_len: MNIST_SIDE,
        samples: images
            .into_iter()
            .zip(labels)
            .map(|(steps, label)| Sample {
                steps,
                target: Target::Class(label as usize),
            })
            .collect(),
    })
}

/// Encodes images (28×28 bytes each) as an IDX image file.
pub fn encode_idx_images(images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * MNIST_SIDE * MNIST_SIDE);
    out.extend_from_slice(&MNIST_IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(MNIST_SIDE as u32).to_be_bytes());
    out.extend_from_slice(&(MNIST_SIDE as u32).to_be_bytes());
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

/// Encodes labels as an IDX label file.
pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&MNIST_LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adding_marker_invariant() {
        let data = generate_adding(200, 10, 7);
        assert_eq!(data.len(), 200);
        for s in &data.samples {
            let marked: Vec<usize> = (0..10).filter(|&t| s.steps[2 * t + 1] == 1.0).collect();
            assert_eq!(marked.len(), 2);
            assert!((0..10).all(|t| s.steps[2 * t + 1] == 0.0 || s.steps[2 * t + 1] == 1.0));
            let sum: f64 = marked.iter().map(|&t| s.steps[2 * t]).sum();
            let Target::Value(target) = s.target else { panic!() };
            assert_eq!(target, sum);
            assert!((0.0..2.0).contains(&target));
        }
    }

    #[test]
    fn adding_is_deterministic_per_seed() {
        assert_eq!(generate_adding(50, 8, 3), generate_adding(50, 8, 3));
        assert_ne!(generate_adding(50, 8, 3), generate_adding(50, 8, 4));
    }

    #[test]
    fn split_sizes() {
        let (train, test) = generate_adding(100, 4, 0).split_at(90);
        assert_eq!((train.len(), test.len()), (90, 10));
        assert_eq!(test.task, Task::Adding);
    }

    #[test]
    fn idx_round_trip_and_scaling() {
        let mut img = vec![0u8; 784];
        img[0] = 255;
        img[28] = 51;
        let bytes = encode_idx_images(&[img, vec![0u8; 784]]);
        let images = parse_idx_images(&bytes, Path::new("x")).unwrap();
        assert_eq!(images.len(), 2);
        assert_eq!(images[0][0], 1.0);
        assert_eq!(images[0][28], 0.2);
        assert!(images[1].iter().all(|&p| p == 0.0));
        let labels = parse_idx_labels(&encode_idx_labels(&[3, 9]), Path::new("y")).unwrap();
        assert_eq!(labels, vec![3, 9]);
    }

    #[test]
    fn idx_faults_are_distinct() {
        let p = Path::new("f");
        let mut bytes = encode_idx_images(&[vec![0u8; 784]]);
        assert!(matches!(parse_idx_labels(&bytes, p), Err(MnistError::BadMagic { .. })));
        bytes.truncate(100);
        assert!(matches!(
            parse_idx_images(&bytes, p),
            Err(MnistError::Truncated { offset: 100, expected: 800, .. })
        ));
        assert!(matches!(parse_idx_images(&[0, 0], p), Err(MnistError::Truncated { .. })));
        assert!(matches!(
            parse_idx_labels(&encode_idx_labels(&[12]), p),
            Err(MnistError::BadLabel { label: 12, .. })
        ));
    }

    #[test]
    fn count_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img");
        let lbl = dir.path().join("lbl");
        fs::write(&img, encode_idx_images(&vec![vec![0u8; 784]; 2])).unwrap();
        fs::write(&lbl, encode_idx_labels(&[1])).unwrap();
        assert!(matches!(
            load_mnist_idx(&img, &lbl),
            Err(MnistError::CountMismatch { images: 2, labels: 1 })
        ));
        fs::write(&lbl, encode_idx_labels(&[1, 2])).unwrap();
        let data = load_mnist_idx(&img, &lbl).unwrap();
        assert_eq!(data.samples[1].target, Target::Class(2));
        assert_eq!(data.samples[0].steps.len(), 28 * 28);
        assert!(matches!(
            load_mnist_idx(&dir.path().join("missing"), &lbl),
            Err(MnistError::Io { .. })
        ));
    }
}
