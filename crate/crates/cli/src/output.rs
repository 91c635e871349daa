use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use coallab::stats::VerificationReport;

/// Writes the ecdf grid of a report as `value,empirical_cdf,analytic_cdf`.
pub fn write_ecdf(report: &VerificationReport, path: &Path) -> anyhow::Result<()> {
    let grid = report
        .ecdf_grid
        .as_ref()
        .context("this report carries no ecdf grid")?;
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    );
    writeln!(w, "value,empirical_cdf,analytic_cdf")?;
    for p in grid {
        writeln!(w, "{},{},{}", p.value, p.empirical, p.analytic)?;
    }
    w.flush()?;
    Ok(())
}
