//! Minibatch SGD with optional gradient clipping and per-epoch spectrum
//! stabilization of the recurrent matrices.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cell::{backward_into, forward, CellError, CellKind, CellParams, Target};
use super::data::Dataset;
use super::Task;
use crate::matrix::{Matrix, MatrixError};
use crate::spectral::{spectral_report, SpectralReport};
use crate::stabilizer::{stabilize, StabilizeError, StabilizerConfig};

/// Absolute error under which an adding-task prediction counts as correct.
pub const ADDING_TOLERANCE: f64 = 0.04;

fn unit_decay() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub task: Task,
    pub kind: CellKind,
    pub hidden: usize,
    pub batch: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Multiplies the learning rate after every epoch.
    #[serde(default = "unit_decay")]
    pub lr_decay: f64,
    pub seed: u64,
    /// Global gradient-norm clip.
    pub grad_clip: Option<f64>,
    /// Applied to every recurrent matrix after each epoch when present.
    pub stabilize: Option<StabilizerConfig>,
    pub adding_tolerance: f64,
    /// Stop once test accuracy reaches this value.
    #[serde(default)]
    pub target_accuracy: Option<f64>,
}

impl TrainConfig {
    pub fn new(task: Task, kind: CellKind) -> Self {
        let (hidden, batch, epochs, learning_rate) = match task {
            Task::Adding => (128, 128, 30, 0.1),
            Task::SeqMnist => (100, 32, 200, 1e-6),
        };
        Self {
            task,
            kind,
            hidden,
            batch,
            epochs,
            learning_rate,
            lr_decay: 1.0,
            seed: 0,
            grad_clip: Some(1.0),
            stabilize: None,
            adding_tolerance: ADDING_TOLERANCE,
            target_accuracy: None,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.hidden == 0 || self.batch == 0 || self.epochs == 0 {
            return Err(TrainError::Config("hidden, batch and epochs must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(TrainError::Config("learning rate must be finite and non-negative".into()));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(TrainError::Config("learning-rate decay must lie in (0, 1]".into()));
        }
        if matches!(self.grad_clip, Some(c) if c.is_nan() || c <= 0.0) {
            return Err(TrainError::Config("gradient clip must be positive".into()));
        }
        Ok(())
    }

    pub fn output_dim(&self) -> usize {
        match self.task {
            Task::Adding => 1,
            Task::SeqMnist => 10,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("dataset is for {found:?}, configuration expects {expected:?}")]
    TaskMismatch { expected: Task, found: Task },
    #[error("empty training set")]
    EmptyData,
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Stabilize(#[from] StabilizeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpectrum {
    pub gate: String,
    #[serde(flatten)]
    pub report: SpectralReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean training loss over the epoch.
    pub loss: f64,
    /// Test accuracy when a test set was given, training accuracy otherwise.
    pub accuracy: f64,
    pub gates: Vec<GateSpectrum>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: CellParams,
    pub history: Vec<EpochRecord>,
}

/// Fraction of samples predicted correctly: within the tolerance for the
/// adding task, argmax match for MNIST.
pub fn accuracy(cell: &CellParams, data: &Dataset, tolerance: f64) -> Result<f64, CellError> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for s in &data.samples {
        let y = forward(cell, &s.steps)?.output;
        let hit = match s.target {
            Target::Value(t) => (y[0] - t).abs() <= tolerance,
            Target::Class(c) => argmax(&y) == c,
        };
        correct += usize::from(hit);
    }
    Ok(correct as f64 / data.len() as f64)
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
        .0
}

/// Spectral summary of every recurrent matrix.
pub fn gate_spectra(cell: &CellParams) -> Result<Vec<GateSpectrum>, MatrixError> {
    cell.recurrent_matrices()
        .into_iter()
        .map(|(gate, m)| Ok(GateSpectrum { gate, report: spectral_report(&m)? }))
        .collect()
}

fn stabilizer_seed(base: u64, epoch: usize, gate: usize) -> u64 {
    base ^ ((epoch as u64) << 32) ^ ((gate as u64 + 1) << 8) ^ 0x5eed
}

/// Replaces every recurrent matrix by its stabilized version.
pub fn stabilize_cell(cell: &mut CellParams, cfg: &StabilizerConfig, epoch: usize) -> Result<(), StabilizeError> {
    let h = cell.hidden;
    for (k, gate) in cell.gates.iter_mut().enumerate() {
        let w = Matrix::from_real(h, h, &gate.recurrent)?;
        let per_gate = StabilizerConfig {
            seed: stabilizer_seed(cfg.seed, epoch, k),
            ..cfg.clone()
        };
        gate.recurrent = stabilize(&w, &per_gate)?.w_s.real_parts();
    }
    Ok(())
}

/// Trains from a seeded initialization. Deterministic for a given
/// configuration and data.
pub fn train(cfg: &TrainConfig, data: &Dataset, test: Option<&Dataset>) -> Result<TrainOutcome, TrainError> {
    train_with(cfg, data, test, |_, _| {})
}

/// [`train`] with a callback invoked after each epoch.
pub fn train_with(
    cfg: &TrainConfig,
    data: &Dataset,
    test: Option<&Dataset>,
    mut on_epoch: impl FnMut(&EpochRecord, &CellParams),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    for d in std::iter::once(data).chain(test) {
        if d.task != cfg.task {
            return Err(TrainError::TaskMismatch {
                expected: cfg.task,
                found: d.task,
            });
        }
    }
    if data.is_empty() {
        return Err(TrainError::EmptyData);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = CellParams::init(cfg.kind, cfg.hidden, data.input_dim, cfg.output_dim(), &mut rng);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut sample_loss = vec![0.0; data.len()];
    let mut history = Vec::with_capacity(cfg.epochs);

    let mut lr = cfg.learning_rate;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch) {
            let mut grad = params.zeros_like();
            for &k in batch {
                let s = &data.samples[k];
                sample_loss[k] = backward_into(&params, &s.steps, s.target, cfg.task, &mut grad)?;
                if !sample_loss[k].is_finite() {
                    return Err(TrainError::Diverged { epoch });
                }
            }
            grad.scale_all(1.0 / batch.len() as f64);
            if let Some(clip) = cfg.grad_clip {
                let norm = grad.global_norm();
                if norm > clip {
                    grad.scale_all(clip / norm);
                }
            }
            params.add_scaled(&grad, -lr);
            if !params.is_finite() {
                return Err(TrainError::Diverged { epoch });
            }
        }
        lr *= cfg.lr_decay;
        if let Some(stab) = &cfg.stabilize {
            stabilize_cell(&mut params, stab, epoch)?;
        }

        // summed in sample order so the value is independent of the shuffle
        let loss = sample_loss.iter().sum::<f64>() / data.len() as f64;
        let accuracy = accuracy(&params, test.unwrap_or(data), cfg.adding_tolerance)?;
        let record = EpochRecord {
            epoch,
            loss,
            accuracy,
            gates: gate_spectra(&params)?,
        };
        on_epoch(&record, &params);
        history.push(record);
        if matches!(cfg.target_accuracy, Some(t) if accuracy >= t) {
            break;
        }
    }
    Ok(TrainOutcome { params, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::data::generate_adding;

    fn small(kind: CellKind) -> TrainConfig {
        TrainConfig {
            hidden: 6,
            batch: 16,
            epochs: 3,
            learning_rate: 0.05,
            ..TrainConfig::new(Task::Adding, kind)
        }
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let data = generate_adding(64, 6, 1);
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..small(CellKind::Rnn)
        };
        let out = train(&cfg, &data, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let init = CellParams::init(cfg.kind, cfg.hidden, 2, 1, &mut rng);
        assert_eq!(out.params, init);
        let first = out.history[0].loss;
        assert!(out.history.iter().all(|r| r.loss == first));
    }

    #[test]
    fn deterministic_per_seed() {
        let data = generate_adding(64, 6, 1);
        for kind in [CellKind::Rnn, CellKind::Lstm, CellKind::Gru] {
            let a = train(&small(kind), &data, None).unwrap();
            let b = train(&small(kind), &data, None).unwrap();
            assert_eq!(a.params, b.params);
            assert_eq!(a.history, b.history);
        }
    }

    #[test]
    fn stabilized_training_stays_in_the_unit_disk() {
        let data = generate_adding(64, 6, 2);
        let cfg = TrainConfig {
            stabilize: Some(StabilizerConfig::with_iterations(200, 9)),
            ..small(CellKind::Gru)
        };
        let out = train(&cfg, &data, None).unwrap();
        for rec in &out.history {
            assert_eq!(rec.gates.len(), 3);
            for g in &rec.gates {
                assert!(g.report.spectral_radius <= 1.0 + 1e-6, "{g:?}");
            }
        }
    }

    #[test]
    fn history_has_every_gate() {
        let data = generate_adding(32, 5, 2);
        let out = train(&small(CellKind::Lstm), &data, None).unwrap();
        assert_eq!(out.history.len(), 3);
        let names: Vec<&str> = out.history[0].gates.iter().map(|g| g.gate.as_str()).collect();
        assert_eq!(names, ["input", "forget", "cell", "output"]);
    }

    #[test]
    fn divergence_is_reported() {
        let data = generate_adding(32, 5, 2);
        let cfg = TrainConfig {
            learning_rate: 1e300,
            grad_clip: None,
            ..small(CellKind::Rnn)
        };
        assert!(matches!(train(&cfg, &data, None), Err(TrainError::Diverged { .. })));
    }

    #[test]
    fn rejects_bad_config_and_task_mismatch() {
        let data = generate_adding(8, 3, 0);
        let cfg = TrainConfig {
            batch: 0,
            ..small(CellKind::Rnn)
        };
        assert!(matches!(train(&cfg, &data, None), Err(TrainError::Config(_))));
        let cfg = TrainConfig::new(Task::SeqMnist, CellKind::Rnn);
        assert!(matches!(train(&cfg, &data, None), Err(TrainError::TaskMismatch { .. })));
    }

    #[test]
    fn accuracy_of_perfect_and_constant_predictors() {
        let data = generate_adding(400, 5, 3);
        // zero weights, readout bias = 1 → always predicts 1.0
        let mut cell = CellParams::zeros(CellKind::Rnn, 2, 2, 1);
        cell.readout_bias[0] = 1.0;
        let acc = accuracy(&cell, &data, ADDING_TOLERANCE).unwrap();
        let oracle = data
            .samples
            .iter()
            .filter(|s| matches!(s.target, Target::Value(t) if (t - 1.0).abs() <= ADDING_TOLERANCE))
            .count() as f64
            / 400.0;
        assert_eq!(acc, oracle);
        assert_eq!(accuracy(&cell, &data, 10.0).unwrap(), 1.0);
    }
}
