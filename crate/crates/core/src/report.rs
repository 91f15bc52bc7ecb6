//! Comma-separated exports. Column layouts are fixed; see `schema/csv.md`.

use std::io::Write;

use crate::averaging::AveragingReport;
use crate::convolution::HistogramDensity;
use crate::error::Result;

pub const SWEEP_COLUMNS: [&str; 7] = [
    "t_or_radius",
    "l1_exact",
    "l1_mc",
    "l1_mc_stderr",
    "oracle_bound",
    "samples",
    "seed",
];

/// Shortest text that parses back to the same `f64`; exponent form outside [1e-4, 1e15).
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// One row per schedule entry. `samples` is the Monte-Carlo sample count.
pub fn write_sweep_csv<W: Write>(report: &AveragingReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for e in &report.entries {
        w.write_record([
            format_float(e.param),
            format_float(e.l1_exact),
            format_float(e.l1_mc),
            format_float(e.l1_mc_stderr),
            format_float(e.oracle_bound),
            e.mc_samples.to_string(),
            e.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per nonempty cell: `c0, …, c{d−1}, count`.
pub fn write_histogram_csv<W: Write>(hist: &HistogramDensity, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..hist.dim()).map(|j| format!("c{j}")).collect();
    header.push("count".into());
    w.write_record(&header)?;
    for (cell, count) in hist.nonzero_cells() {
        let mut row: Vec<String> = cell.iter().map(|c| c.to_string()).collect();
        row.push(count.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
