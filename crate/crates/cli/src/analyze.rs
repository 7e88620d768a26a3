use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use specto_core::report::svg::{portrait_svg, Panel};
use specto_core::report::{analyze_matrix, contours_csv, AnalysisReport};

use crate::common::{self, GridArgs};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Matrix files (.pspc container or numeric CSV).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Record wall time in report.json (makes the report non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = args.grid.config()?;
    let inputs = common::load_named(&args.inputs)?;
    common::create_dir(&args.out)?;
    let mut report = AnalysisReport::new(cfg.clone());
    for (name, w) in &inputs {
        let art = analyze_matrix(name, w, &cfg).map_err(|e| CliError::analysis(name, e))?;
        common::write_file(&args.out.join(format!("contours-{name}.csv")), contours_csv(&art.contours))?;
        let svg = portrait_svg(
            &Panel {
                title: name,
                contours: &art.contours,
                eigenvalues: &art.field.eigenvalues,
            },
            &art.field.grid,
        );
        common::write_file(&args.out.join(format!("portrait-{name}.svg")), svg)?;
        let a = &art.analysis;
        println!(
            "{name}: {}x{} rho={:.6} henrici={:.6} departure={:.6} kreiss>={:.6} {}",
            a.rows,
            a.cols,
            a.spectral_radius,
            a.henrici,
            a.schur_departure,
            a.kreiss_lower_bound.unwrap_or(f64::NAN),
            if a.stable { "stable" } else { "unstable" }
        );
        report.matrices.push(art.analysis);
    }
    if args.timing {
        report.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    common::write_file(&args.out.join("report.json"), common::json(&report))
}
