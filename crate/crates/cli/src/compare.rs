use std::path::PathBuf;

use clap::Args;
use specto_core::report::compare_matrices;
use specto_core::report::svg::{compare_svg, Panel};

use crate::common::{self, GridArgs};
use crate::error::CliError;

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub before: PathBuf,
    pub after: PathBuf,
    /// Output directory for compare.svg and compare.json.
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    let cfg = args.grid.config()?;
    let mut named = common::load_named(&[args.before.clone(), args.after.clone()])?;
    let (after_name, after) = named.pop().expect("two inputs");
    let (before_name, before) = named.pop().expect("two inputs");
    let (report, a, b) = compare_matrices((&before_name, &before), (&after_name, &after), &cfg)
        .map_err(|e| CliError::analysis(&format!("{before_name} vs {after_name}"), e))?;
    common::create_dir(&args.out)?;
    let svg = compare_svg(
        &Panel {
            title: &before_name,
            contours: &a.contours,
            eigenvalues: &a.field.eigenvalues,
        },
        &Panel {
            title: &after_name,
            contours: &b.contours,
            eigenvalues: &b.field.eigenvalues,
        },
        &report.grid,
    );
    common::write_file(&args.out.join("compare.svg"), svg)?;
    common::write_file(&args.out.join("compare.json"), common::json(&report))?;
    println!(
        "henrici {:.6} -> {:.6} (delta {:.3e}); rho {:.6} -> {:.6}",
        report.before.henrici,
        report.after.henrici,
        report.henrici_delta,
        report.before.spectral_radius,
        report.after.spectral_radius
    );
    for area in &report.areas {
        println!(
            "eps={:e}: {} -> {} nodes{}",
            area.level,
            area.before_nodes,
            area.after_nodes,
            area.ratio.map(|r| format!(" (x{r:.3})")).unwrap_or_default()
        );
    }
    Ok(())
}
