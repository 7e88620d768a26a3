use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use specto_core::report::{AnalysisConfig, AnalysisReport, MatrixAnalysis};
use specto_core::rnn::{generate_adding, load_mnist_idx, train_with, CellKind, CellParams, Dataset, EpochRecord, Task, TrainConfig};
use specto_core::stabilizer::StabilizerConfig;
use specto_core::Matrix;

use crate::common;
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// adding or mnist.
    #[arg(long)]
    pub task: Task,
    /// rnn, lstm or gru.
    #[arg(long)]
    pub kind: CellKind,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Learning-rate factor applied after every epoch.
    #[arg(long, default_value_t = 1.0)]
    pub lr_decay: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Global gradient-norm clip.
    #[arg(long, default_value_t = 1.0, conflicts_with = "no_clip")]
    pub clip: f64,
    #[arg(long)]
    pub no_clip: bool,
    /// Stabilize every recurrent matrix after each epoch with M power iterations.
    #[arg(long, value_name = "M", num_args = 0..=1, default_missing_value = "1")]
    pub stabilize: Option<usize>,
    /// Stop as soon as test accuracy reaches this value.
    #[arg(long)]
    pub target_accuracy: Option<f64>,
    /// Adding-task sequence length.
    #[arg(long, default_value_t = 50)]
    pub seq_len: usize,
    /// Accuracy tolerance for the adding task.
    #[arg(long, default_value_t = specto_core::rnn::ADDING_TOLERANCE)]
    pub tolerance: f64,
    /// Training samples (adding: generated; mnist: leading subset).
    #[arg(long)]
    pub train_size: Option<usize>,
    /// Test samples.
    #[arg(long)]
    pub test_size: Option<usize>,
    /// Directory holding the MNIST IDX files.
    #[arg(long, default_value = "data/mnist")]
    pub mnist_dir: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
}

const ADDING_TRAIN: usize = 45_000;
const ADDING_TEST: usize = 5_000;

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        let base = TrainConfig::new(self.task, self.kind);
        TrainConfig {
            hidden: self.hidden.unwrap_or(base.hidden),
            batch: self.batch.unwrap_or(base.batch),
            epochs: self.epochs.unwrap_or(base.epochs),
            learning_rate: self.lr.unwrap_or(base.learning_rate),
            lr_decay: self.lr_decay,
            seed: self.seed,
            grad_clip: (!self.no_clip).then_some(self.clip),
            stabilize: self.stabilize.map(|m| StabilizerConfig::with_iterations(m, self.seed)),
            adding_tolerance: self.tolerance,
            target_accuracy: self.target_accuracy,
            ..base
        }
    }

    fn datasets(&self) -> Result<(Dataset, Dataset), CliError> {
        match self.task {
            Task::Adding => {
                if self.seq_len < 2 {
                    return Err(CliError::Usage("--seq-len must be at least 2".into()));
                }
                let train = generate_adding(self.train_size.unwrap_or(ADDING_TRAIN), self.seq_len, data_seed(self.seed, 0));
                let test = generate_adding(self.test_size.unwrap_or(ADDING_TEST), self.seq_len, data_seed(self.seed, 1));
                Ok((train, test))
            }
            Task::SeqMnist => {
                let dir = &self.mnist_dir;
                let mut train = load_mnist_idx(&dir.join("train-images-idx3-ubyte"), &dir.join("train-labels-idx1-ubyte"))?;
                let mut test = load_mnist_idx(&dir.join("t10k-images-idx3-ubyte"), &dir.join("t10k-labels-idx1-ubyte"))?;
                if let Some(n) = self.train_size {
                    train = train.truncated(n);
                }
                if let Some(n) = self.test_size {
                    test = test.truncated(n);
                }
                Ok((train, test))
            }
        }
    }
}

/// Dataset seeds are kept apart from the parameter-initialisation stream.
fn data_seed(seed: u64, split: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xADD0 + split)
}

fn gate_matrix(cell: &CellParams, gate: usize) -> Matrix {
    Matrix::from_real(cell.hidden, cell.hidden, &cell.gates[gate].recurrent).expect("trained weights are finite")
}

fn write_final(dir: &Path, cell: &CellParams) -> Result<(), CliError> {
    let (h, i, o) = (cell.hidden, cell.input, cell.output);
    for gate in &cell.gates {
        let g = &gate.name;
        let parts = [
            ("recurrent", h, h, &gate.recurrent),
            ("input", h, i, &gate.input),
            ("bias", h, 1, &gate.bias),
        ];
        for (part, rows, cols, data) in parts {
            let m = Matrix::from_real(rows, cols, data).expect("trained weights are finite");
            common::write_container(&dir.join(format!("final-{g}-{part}.pspc")), m, &format!("{g}-{part}"))?;
        }
    }
    let readout = Matrix::from_real(o, h, &cell.readout).expect("trained weights are finite");
    common::write_container(&dir.join("final-readout.pspc"), readout, "readout")?;
    let bias = Matrix::from_real(o, 1, &cell.readout_bias).expect("trained weights are finite");
    common::write_container(&dir.join("final-readout-bias.pspc"), bias, "readout-bias")
}

fn history_header(kind: CellKind) -> String {
    let mut s = String::from("epoch,loss,accuracy");
    for g in kind.gate_names() {
        let _ = write!(s, ",rho_{g},henrici_{g}");
    }
    s.push('\n');
    s
}

fn history_row(r: &EpochRecord) -> String {
    let mut s = format!("{},{},{}", r.epoch, r.loss, r.accuracy);
    for g in &r.gates {
        let _ = write!(s, ",{},{}", g.report.spectral_radius, g.report.henrici);
    }
    s.push('\n');
    s
}

fn write_epoch(dir: &Path, cfg: &TrainConfig, record: &EpochRecord, cell: &CellParams) -> Result<(), CliError> {
    let mut report = AnalysisReport::new(AnalysisConfig::default());
    report.training = Some(cfg.clone());
    for (k, g) in record.gates.iter().enumerate() {
        let name = format!("{}-{}", cfg.kind.as_str(), g.gate);
        report
            .matrices
            .push(MatrixAnalysis::from_spectral(&name, (cell.hidden, cell.hidden), &g.report));
        let path = dir.join(format!("weights-epoch{:03}-{}.pspc", record.epoch, g.gate));
        common::write_container(&path, gate_matrix(cell, k), &name)?;
    }
    common::write_file(&dir.join(format!("report-epoch{:03}.json", record.epoch)), common::json(&report))
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let cfg = args.config();
    let (train_set, test_set) = args.datasets()?;
    common::create_dir(&args.out)?;
    let mut history = history_header(cfg.kind);
    let mut write_error = None;
    let outcome = train_with(&cfg, &train_set, Some(&test_set), |record, cell| {
        history.push_str(&history_row(record));
        println!("epoch {:3}  loss {:.6}  accuracy {:.4}", record.epoch, record.loss, record.accuracy);
        if write_error.is_none() {
            write_error = write_epoch(&args.out, &cfg, record, cell).err();
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    let outcome = outcome?;
    common::write_file(&args.out.join("history.csv"), &history)?;
    write_final(&args.out, &outcome.params)?;
    let last = outcome.history.last().expect("at least one epoch");
    println!("final accuracy {:.4}", last.accuracy);
    Ok(())
}
