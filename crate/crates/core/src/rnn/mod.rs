//! Small recurrent networks trained with backpropagation through time.

pub mod cell;
pub mod data;
pub mod train;

use serde::{Deserialize, Serialize};

pub use cell::{
    backward, extract_recurrent_matrices, forward, loss, softmax, state_jacobian_norms, CellError,
    CellKind, CellParams, ForwardOutput, Gate, Target,
};
pub use data::{generate_adding, load_mnist_idx, Dataset, MnistError, Sample};
pub use train::{
    accuracy, gate_spectra, train, train_with, EpochRecord, GateSpectrum, TrainConfig, TrainError,
    TrainOutcome, ADDING_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Sum of two marked values in a two-channel sequence.
    Adding,
    /// MNIST digits fed one pixel row per step.
    #[serde(rename = "mnist")]
    SeqMnist,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Adding => "adding",
            Task::SeqMnist => "mnist",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "adding" => Ok(Task::Adding),
            "mnist" | "seqmnist" => Ok(Task::SeqMnist),
            other => Err(format!("unknown task `{other}` (expected adding or mnist)")),
        }
    }
}
