//! One function per subcommand. Each returns the CSV payload and a JSON
//! result; nothing touches the filesystem here.

use ergavg_core::averaging::{convergence_sweep, iterated_mc_check, iterated_vs_convolution, SweepOptions};
use ergavg_core::convolution::{
    ac_diagnostic, disintegration_test, general_position_check, jacobian_scan, DEFAULT_DEGENERACY_THRESHOLD,
};
use ergavg_core::report::{format_float, write_histogram_csv, write_sweep_csv};
use ergavg_core::Error;
use serde_json::{json, Value};

use crate::config::{BudgetSpec, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::Command;

pub struct RunOutput {
    pub csv_name: &'static str,
    pub csv: Vec<u8>,
    pub status: &'static str,
    pub result: Value,
    pub exit_code: u8,
}

const DEFAULT_TRIALS: usize = 1_000;
const DEFAULT_GENERAL_POSITION_THRESHOLD: f64 = 1e-12;
const DEFAULT_CONV_SAMPLES: usize = 1_000_000;
const DEFAULT_CELLS: usize = 30;
const DEFAULT_DISINTEGRATION_SAMPLES: usize = 100_000;
const DEFAULT_ITERATE_SAMPLES: usize = 100_000;

/// Fill in every budget entry the command reads, so the echo is explicit.
pub fn effective_budget(command: Command, b: BudgetSpec) -> BudgetSpec {
    let grid = b.grid();
    match command {
        Command::RunSweep => BudgetSpec {
            mc_samples: Some(grid.mc_samples),
            lattice_points: Some(grid.lattice_points),
            certificate_radius: Some(b.certificate_radius()),
            scan_budget: Some(b.scan_budget()),
            ..b
        },
        Command::CheckErgodicity => BudgetSpec {
            certificate_radius: Some(b.certificate_radius()),
            scan_budget: Some(b.scan_budget()),
            ..b
        },
        Command::CheckGeneralPosition => BudgetSpec {
            trials: Some(b.trials.unwrap_or(DEFAULT_TRIALS)),
            threshold: Some(b.threshold.unwrap_or(DEFAULT_GENERAL_POSITION_THRESHOLD)),
            ..b
        },
        Command::ConvDensity => BudgetSpec {
            samples: Some(b.samples.unwrap_or(DEFAULT_CONV_SAMPLES)),
            cells: Some(b.cells.unwrap_or(DEFAULT_CELLS)),
            ..b
        },
        Command::JacobianScan => BudgetSpec {
            trials: Some(b.trials.unwrap_or(100 * DEFAULT_TRIALS)),
            threshold: Some(b.threshold.unwrap_or(DEFAULT_DEGENERACY_THRESHOLD)),
            ..b
        },
        Command::DisintegrationTest => BudgetSpec {
            samples: Some(b.samples.unwrap_or(DEFAULT_DISINTEGRATION_SAMPLES)),
            ..b
        },
        Command::IterateCheck => BudgetSpec {
            mc_samples: Some(b.mc_samples.unwrap_or(DEFAULT_ITERATE_SAMPLES)),
            ..b
        },
    }
}

/// Check every section the command needs before any work starts.
pub fn validate(command: Command, c: &ExperimentConfig) -> CliResult<()> {
    c.seed()?;
    match command {
        Command::RunSweep => {
            let flow = c.flow()?;
            c.observable(flow.torus_dim())?;
            let family = c.family()?;
            ergavg_core::averaging::validate_schedule(family.schedule())?;
        }
        Command::CheckErgodicity => {
            c.flow()?;
        }
        Command::CheckGeneralPosition | Command::ConvDensity => {
            c.measure()?.build()?;
        }
        Command::JacobianScan => {
            c.measure()?.sphere()?;
        }
        Command::DisintegrationTest => {
            c.measure()?.sphere()?;
            c.colatitude()?;
        }
        Command::IterateCheck => {
            let flow = c.flow()?;
            c.observable(flow.torus_dim())?;
            c.measure()?.build()?;
            let it = c.iterate()?;
            if it.t.is_empty() || it.n == 0 || it.x.len() != flow.torus_dim() {
                return Err(CliError::Config(
                    "[iterate] needs nonempty `t`, `n` ≥ 1 and a torus point `x` of the flow's dimension".into(),
                ));
            }
        }
    }
    Ok(())
}

pub fn run(command: Command, c: &ExperimentConfig, waive_ergodicity: bool) -> CliResult<RunOutput> {
    let seed = c.seed()?;
    match command {
        Command::RunSweep => run_sweep(c, seed, waive_ergodicity),
        Command::CheckErgodicity => check_ergodicity(c),
        Command::CheckGeneralPosition => check_general_position(c, seed),
        Command::ConvDensity => conv_density(c, seed),
        Command::JacobianScan => jacobian(c, seed),
        Command::DisintegrationTest => disintegration(c, seed),
        Command::IterateCheck => iterate(c, seed),
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> CliResult<Vec<u8>> {
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Core(Error::from(e))
}

fn run_sweep(c: &ExperimentConfig, seed: u64, waive: bool) -> CliResult<RunOutput> {
    let flow = c.flow()?;
    let obs = c.observable(flow.torus_dim())?;
    let family = c.family()?;
    let options = SweepOptions {
        grid: c.budget.grid(),
        seed,
        certificate_radius: c.budget.certificate_radius(),
        waive_ergodicity: waive,
    };
    let report = match convergence_sweep(&flow, &obs, &family, options) {
        Err(Error::NotErgodic { offending }) => {
            return Err(CliError::Refused(format!(
                "ergodicity certificate failed at k = {offending:?} (Aᵀk ≈ 0); pass --waive-ergodicity to run anyway"
            )))
        }
        other => other?,
    };
    let mut csv = Vec::new();
    write_sweep_csv(&report, &mut csv)?;
    Ok(RunOutput {
        csv_name: "sweep.csv",
        csv,
        status: report.label(),
        result: json!({
            "family": report.family,
            "entries": report.entries.len(),
            "certificate": report.certificate,
            "certificate_status": report.certificate.label(),
            "decay": report.decay,
            "label": report.label(),
        }),
        exit_code: 0,
    })
}

fn check_ergodicity(c: &ExperimentConfig) -> CliResult<RunOutput> {
    let flow = c.flow()?;
    let cert = match flow.ergodicity_certificate_with_budget(c.budget.certificate_radius(), c.budget.scan_budget()) {
        Err(Error::Budget { budget, scanned, partial }) => {
            return Err(CliError::Config(format!(
                "scan budget {budget} exhausted after {scanned} vectors; complete up to radius {} (min |Aᵀk| = {:e})",
                partial.search_radius, partial.min_frequency_norm
            )))
        }
        other => other?,
    };
    let mut w = csv_writer();
    w.write_record(["search_radius", "min_frequency_norm", "offending_k", "threshold", "status"])
        .map_err(csv_err)?;
    let offending = cert
        .offending_k
        .as_ref()
        .map(|k| k.iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
        .unwrap_or_default();
    w.write_record([
        cert.search_radius.to_string(),
        format_float(cert.min_frequency_norm),
        offending,
        format_float(cert.threshold),
        cert.label().to_string(),
    ])
    .map_err(csv_err)?;
    Ok(RunOutput {
        csv_name: "certificate.csv",
        csv: finish(w)?,
        status: cert.label(),
        exit_code: if cert.passed() { 0 } else { 2 },
        result: json!({ "certificate": cert }),
    })
}

fn check_general_position(c: &ExperimentConfig, seed: u64) -> CliResult<RunOutput> {
    let measure = c.measure()?.build()?;
    let trials = c.budget.trials.unwrap_or(DEFAULT_TRIALS);
    let threshold = c.budget.threshold.unwrap_or(DEFAULT_GENERAL_POSITION_THRESHOLD);
    let r = general_position_check(&measure, trials, threshold, seed)?;
    let mut w = csv_writer();
    w.write_record(["dim", "trials", "failures", "min_abs_det", "threshold"]).map_err(csv_err)?;
    w.write_record([
        r.dim.to_string(),
        r.trials.to_string(),
        r.failures.to_string(),
        format_float(r.min_abs_det),
        format_float(r.threshold),
    ])
    .map_err(csv_err)?;
    Ok(RunOutput {
        csv_name: "general_position.csv",
        csv: finish(w)?,
        status: if r.failures == 0 { "GENERAL_POSITION" } else { "DEGENERATE_TRIALS" },
        result: json!({ "general_position": r }),
        exit_code: 0,
    })
}

fn conv_density(c: &ExperimentConfig, seed: u64) -> CliResult<RunOutput> {
    let measure = c.measure()?.build()?;
    let samples = c.budget.samples.unwrap_or(DEFAULT_CONV_SAMPLES);
    let cells = c.budget.cells.unwrap_or(DEFAULT_CELLS);
    let report = ac_diagnostic(&measure, samples, cells, seed)?;
    // Same seed, same draws: the exported histogram is the one diagnosed.
    let points = measure.sample(seed, samples)?;
    let hist = ergavg_core::convolution::estimate_density(&points, cells)?;
    let mut csv = Vec::new();
    write_histogram_csv(&hist, &mut csv)?;
    Ok(RunOutput {
        csv_name: "histogram.csv",
        csv,
        status: report.verdict(),
        result: json!({
            "measure": measure.describe(),
            "histogram": {
                "lo": hist.bounds().lo,
                "hi": hist.bounds().hi,
                "cells_per_axis": hist.cells_per_axis(),
                "total": hist.total(),
            },
            "diagnostic": report,
            "atom_mass_floor": ergavg_core::convolution::AcDiagnosticReport::atom_mass_floor(samples),
            "verdict": report.verdict(),
        }),
        exit_code: 0,
    })
}

fn jacobian(c: &ExperimentConfig, seed: u64) -> CliResult<RunOutput> {
    let sphere = c.measure()?.sphere()?;
    let trials = c.budget.trials.unwrap_or(100 * DEFAULT_TRIALS);
    let threshold = c.budget.threshold.unwrap_or(DEFAULT_DEGENERACY_THRESHOLD);
    let scan = jacobian_scan(&sphere, trials, threshold, seed)?;
    let mut w = csv_writer();
    w.write_record(["trials", "degenerate", "fraction", "threshold", "scaled_threshold"]).map_err(csv_err)?;
    w.write_record([
        scan.trials.to_string(),
        scan.degenerate.to_string(),
        format_float(scan.fraction),
        format_float(scan.threshold),
        format_float(scan.scaled_threshold),
    ])
    .map_err(csv_err)?;
    Ok(RunOutput {
        csv_name: "jacobian_scan.csv",
        csv: finish(w)?,
        status: if scan.degenerate == 0 { "NONDEGENERATE" } else { "DEGENERATE_TRIALS" },
        result: json!({ "jacobian_scan": scan }),
        exit_code: 0,
    })
}

fn disintegration(c: &ExperimentConfig, seed: u64) -> CliResult<RunOutput> {
    let sphere = c.measure()?.sphere()?;
    let samples = c.budget.samples.unwrap_or(DEFAULT_DISINTEGRATION_SAMPLES);
    let r = disintegration_test(&sphere, samples, seed, c.colatitude()?.into())?;
    let mut w = csv_writer();
    w.write_record(["coordinate", "ks", "critical_value", "alpha", "samples"]).map_err(csv_err)?;
    for (j, ks) in r.ks.iter().enumerate() {
        w.write_record([
            j.to_string(),
            format_float(*ks),
            format_float(r.critical_value),
            format_float(r.alpha),
            r.samples.to_string(),
        ])
        .map_err(csv_err)?;
    }
    Ok(RunOutput {
        csv_name: "disintegration.csv",
        csv: finish(w)?,
        status: if r.consistent() { "CONSISTENT" } else { "REJECTED" },
        result: json!({ "disintegration": r, "consistent": r.consistent() }),
        exit_code: 0,
    })
}

fn iterate(c: &ExperimentConfig, seed: u64) -> CliResult<RunOutput> {
    let flow = c.flow()?;
    let obs = c.observable(flow.torus_dim())?;
    let measure = c.measure()?.build()?;
    let it = c.iterate()?;
    let count = c.budget.mc_samples.unwrap_or(DEFAULT_ITERATE_SAMPLES);
    let mut w = csv_writer();
    w.write_record([
        "t", "n", "max_deviation", "analytic_re", "analytic_im", "mc_re", "mc_im", "mc_stderr", "z",
    ])
    .map_err(csv_err)?;
    let (mut worst_dev, mut worst_z) = (0.0f64, 0.0f64);
    let mut rows = Vec::new();
    for (i, &t) in it.t.iter().enumerate() {
        let dev = iterated_vs_convolution(&flow, &obs, &measure, t, it.n)?;
        let mc = iterated_mc_check(
            &flow,
            &obs,
            &measure,
            t,
            it.n,
            &it.x,
            count,
            ergavg_core::rng::derive_seed(seed, i as u64),
        )?;
        worst_dev = worst_dev.max(dev);
        worst_z = worst_z.max(mc.z);
        w.write_record([
            format_float(t),
            it.n.to_string(),
            format_float(dev),
            format_float(mc.analytic_re),
            format_float(mc.analytic_im),
            format_float(mc.mc_re),
            format_float(mc.mc_im),
            format_float(mc.std_error),
            format_float(mc.z),
        ])
        .map_err(csv_err)?;
        rows.push(json!({ "t": t, "max_deviation": dev, "mc": mc }));
    }
    let agree = worst_dev <= 1e-12 && worst_z <= 4.0;
    Ok(RunOutput {
        csv_name: "iterate.csv",
        csv: finish(w)?,
        status: if agree { "AGREE" } else { "DISAGREE" },
        result: json!({ "n": it.n, "rows": rows, "max_deviation": worst_dev, "max_z": worst_z }),
        exit_code: 0,
    })
}
