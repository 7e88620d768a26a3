use std::path::PathBuf;

use clap::Args;
use specto_core::io::write_matrix_csv;
use specto_core::stabilizer::{stabilize, StabilizerConfig};

use crate::common;
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct StabilizeArgs {
    /// Matrix file (.pspc container or numeric CSV).
    pub input: PathBuf,
    /// Output file; written as CSV when the name ends in `.csv`, else as a container.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Power iterations.
    #[arg(long, short = 'm', default_value_t = 1)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard deviation of the random start vector.
    #[arg(long, default_value_t = 1.0)]
    pub sigma0: f64,
}

pub fn run(args: &StabilizeArgs) -> Result<(), CliError> {
    let (name, w) = common::load_named(std::slice::from_ref(&args.input))?.remove(0);
    let cfg = StabilizerConfig {
        sigma0: args.sigma0,
        ..StabilizerConfig::with_iterations(args.iterations, args.seed)
    };
    let result = stabilize(&w, &cfg).map_err(|e| CliError::stabilize(&name, e))?;
    if args.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        common::write_file(&args.out, write_matrix_csv(&result.w_s))?;
    } else {
        common::write_container(&args.out, result.w_s, &name)?;
    }
    println!("{:.16e}", result.gain_estimate);
    Ok(())
}
