//! `ergavg`: configuration-driven experiment runner.

mod commands;
mod config;
mod error;
mod presets;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{BudgetSpec, ExperimentConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "ergavg", version, about = "Experiments on singular averages of ergodic torus multiflows")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    args: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// L1 error of the averages along a schedule of times or sphere radii.
    RunSweep,
    /// Search for resonances Aᵀk ≈ 0 up to a frequency radius.
    CheckErgodicity,
    /// Linear independence of curve tangents at random parameters.
    CheckGeneralPosition,
    /// Histogram and absolute-continuity diagnostics for a measure.
    ConvDensity,
    /// Degenerate-fraction scan of the sphere sum-map Jacobian.
    JacobianScan,
    /// Compare uniform sphere draws with longitude-fibered draws.
    DisintegrationTest,
    /// Iterated averaging against averaging with the convolution power.
    IterateCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::RunSweep => "run-sweep",
            Command::CheckErgodicity => "check-ergodicity",
            Command::CheckGeneralPosition => "check-general-position",
            Command::ConvDensity => "conv-density",
            Command::JacobianScan => "jacobian-scan",
            Command::DisintegrationTest => "disintegration-test",
            Command::IterateCheck => "iterate-check",
        }
    }
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset; configuration file sections override it.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory (default: `[output] dir`, else `ergavg-out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run sweeps even when the ergodicity certificate fails; output is labeled NONERGODIC.
    #[arg(long, global = true)]
    waive_ergodicity: bool,
    /// List presets and exit.
    #[arg(long, global = true)]
    list_presets: bool,
    #[arg(long, global = true)]
    mc_samples: Option<usize>,
    #[arg(long, global = true)]
    lattice_points: Option<usize>,
    #[arg(long, global = true)]
    certificate_radius: Option<u32>,
    #[arg(long, global = true)]
    scan_budget: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    cells: Option<usize>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
}

impl RunArgs {
    fn budget(&self) -> BudgetSpec {
        BudgetSpec {
            mc_samples: self.mc_samples,
            lattice_points: self.lattice_points,
            certificate_radius: self.certificate_radius,
            scan_budget: self.scan_budget,
            trials: self.trials,
            samples: self.samples,
            cells: self.cells,
            threshold: self.threshold,
        }
    }
}

/// Preset, then file, then flags.
fn resolve(command: Command, args: &RunArgs) -> CliResult<(ExperimentConfig, PathBuf)> {
    let file = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let preset_name = args.preset.clone().or_else(|| file.preset.clone());
    let base = match &preset_name {
        Some(name) => {
            let p = presets::find(name).ok_or_else(|| CliError::Config(format!("unknown preset `{name}`")))?;
            ExperimentConfig { preset: Some(p.name.to_string()), ..(p.config)() }
        }
        None => ExperimentConfig::default(),
    };
    let flags = ExperimentConfig {
        preset: preset_name,
        seed: args.seed,
        budget: args.budget(),
        ..ExperimentConfig::default()
    };
    let mut cfg = base.overlay(file).overlay(flags);
    cfg.budget = commands::effective_budget(command, cfg.budget);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from("ergavg-out"));
    let cfg = cfg.resolved()?;
    commands::validate(command, &cfg)?;
    Ok((cfg, out))
}

/// Write via a temporary name and rename, so readers never see half a file.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let tmp = dir.join(format!(".{name}.partial"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

fn execute(command: Command, args: &RunArgs) -> CliResult<u8> {
    let start = Instant::now();
    let (cfg, out) = resolve(command, args)?;
    let echo = cfg.to_toml()?;
    let output = commands::run(command, &cfg, args.waive_ergodicity)?;
    let preset = cfg.preset.as_deref().and_then(presets::find);
    let summary = json!({
        "tool": "ergavg",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "preset": cfg.preset,
        "justification": preset.map(|p| p.justification),
        "seed": cfg.seed,
        "waive_ergodicity": args.waive_ergodicity,
        "status": output.status,
        "csv": output.csv_name,
        "result": output.result,
        "config": echo,
    });
    let mut summary_text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    summary_text.push('\n');

    fs::create_dir_all(&out)?;
    write_atomic(&out, output.csv_name, &output.csv)?;
    write_atomic(&out, "config.toml", echo.as_bytes())?;
    write_atomic(&out, "summary.json", summary_text.as_bytes())?;
    // Wall-clock time varies run to run, so it stays out of summary.json.
    let elapsed = start.elapsed().as_secs_f64();
    let timing = format!("{{\n  \"elapsed_seconds\": {elapsed}\n}}\n");
    write_atomic(&out, "timing.json", timing.as_bytes())?;
    println!("{}: {} ({}; {:.2}s)", command.name(), output.status, out.display(), elapsed);
    Ok(output.exit_code)
}

fn list_presets() {
    for p in presets::PRESETS {
        println!("{:<28} {}", p.name, p.command.name());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors exit 1: exit code 2 is reserved for certificate refusals.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.args.list_presets {
        list_presets();
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("ergavg: a subcommand is required (see --help)");
        return ExitCode::from(1);
    };
    match execute(command, &cli.args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ergavg {}: {e}", command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
