//! `specto`: spectral stability and robustness analysis of recurrent weight
//! matrices from the command line.

mod analyze;
mod common;
mod compare;
mod error;
mod stabilize;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "specto", version, about = "Pseudospectra, non-normality and stabilization of recurrent weight matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral report, ε-contours and an SVG portrait per matrix.
    Analyze(analyze::AnalyzeArgs),
    /// Train a recurrent cell and record per-epoch gate spectra.
    Train(train::TrainArgs),
    /// Rescale a matrix by its power-iteration gain estimate.
    Stabilize(stabilize::StabilizeArgs),
    /// Side-by-side portraits and area deltas for two matrices.
    Compare(compare::CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => analyze::run(a),
        Command::Train(a) => train::run(a),
        Command::Stabilize(a) => stabilize::run(a),
        Command::Compare(a) => compare::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("specto: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
