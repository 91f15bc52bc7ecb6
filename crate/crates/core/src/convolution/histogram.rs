use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::measures::{BoxRegion, Point, WeightMeasure};

/// Smallest sample count accepted by [`ac_diagnostic`].
pub const MIN_DIAGNOSTIC_SAMPLES: usize = 10_000;

/// A cell is an atom suspect when its mass shrinks by less than this factor
/// under one refinement.
pub const ATOM_REFINEMENT_FACTOR: f64 = 1.5;

const MAX_CELLS: usize = 1 << 27;

/// Fixed-grid histogram on a box, `cells_per_axis^dim` cells in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDensity {
    bounds: BoxRegion,
    cells_per_axis: usize,
    counts: Vec<u64>,
    total: u64,
}

impl HistogramDensity {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &BoxRegion {
        &self.bounds
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, cell: &[usize]) -> u64 {
        self.counts[self.flatten(cell)]
    }

    pub fn fraction(&self, cell: &[usize]) -> f64 {
        self.count(cell) as f64 / self.total as f64
    }

    pub fn max_cell_fraction(&self) -> f64 {
        self.counts.iter().copied().max().unwrap_or(0) as f64 / self.total as f64
    }

    /// `(cell indices, count)` for every nonempty cell, in row-major order.
    pub fn nonzero_cells(&self) -> impl Iterator<Item = (Vec<usize>, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(i, c)| (self.unflatten(i), *c))
    }

    fn flatten(&self, cell: &[usize]) -> usize {
        cell.iter().fold(0, |acc, c| acc * self.cells_per_axis + c)
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut cell = vec![0; self.dim()];
        for slot in cell.iter_mut().rev() {
            *slot = flat % self.cells_per_axis;
            flat /= self.cells_per_axis;
        }
        cell
    }

    fn cell_of(&self, x: &[f64]) -> usize {
        let n = self.cells_per_axis;
        let idx: Vec<usize> = x
            .iter()
            .zip(self.bounds.lo.iter().zip(&self.bounds.hi))
            .map(|(v, (lo, hi))| {
                let u = (v - lo) / (hi - lo);
                ((u * n as f64).floor().max(0.0) as usize).min(n - 1)
            })
            .collect();
        self.flatten(&idx)
    }

    /// Histogram of `samples` on a given box.
    pub fn on_box(samples: &[Point], bounds: BoxRegion, cells_per_axis: usize) -> Result<Self> {
        if cells_per_axis < 2 {
            return config("histogram needs at least 2 cells per axis");
        }
        let dim = bounds.dim();
        let cells = cells_per_axis
            .checked_pow(dim as u32)
            .filter(|c| *c <= MAX_CELLS)
            .ok_or_else(|| Error::Config(format!("{cells_per_axis}^{dim} cells is too many")))?;
        let mut h = HistogramDensity {
            bounds,
            cells_per_axis,
            counts: vec![0; cells],
            total: 0,
        };
        for x in samples {
            if x.len() != dim {
                return Err(Error::Usage("samples have inconsistent dimension".into()));
            }
            let i = h.cell_of(x);
            h.counts[i] += 1;
            h.total += 1;
        }
        Ok(h)
    }
}

/// Histogram on the tight bounding box of the samples, widened by 1% of its
/// width on each side (1% of `max(|center|, 1)` along degenerate axes).
pub fn estimate_density(samples: &[Point], cells_per_axis: usize) -> Result<HistogramDensity> {
    let Some(first) = samples.first() else {
        return Err(Error::Usage("cannot estimate a density from zero samples".into()));
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::Usage("samples must have at least one coordinate".into()));
    }
    let mut lo = first.clone();
    let mut hi = first.clone();
    for x in samples {
        if x.len() != dim {
            return Err(Error::Usage("samples have inconsistent dimension".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Usage("samples must have finite coordinates".into()));
        }
        for j in 0..dim {
            lo[j] = lo[j].min(x[j]);
            hi[j] = hi[j].max(x[j]);
        }
    }
    for j in 0..dim {
        let width = hi[j] - lo[j];
        let pad = if width > 0.0 {
            0.01 * width
        } else {
            0.01 * (0.5 * (lo[j] + hi[j])).abs().max(1.0)
        };
        lo[j] -= pad;
        hi[j] += pad;
    }
    HistogramDensity::on_box(samples, BoxRegion::new(lo, hi)?, cells_per_axis)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomSuspect {
    pub cell: Vec<usize>,
    pub fraction: f64,
    /// Largest fraction among the cell's children after refinement.
    pub refined_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcDiagnosticReport {
    pub samples: usize,
    pub cells_per_axis: usize,
    pub max_cell_fraction: f64,
    /// Same statistic at twice the cells per axis, on the same samples and box.
    pub max_cell_fraction_refined: f64,
    /// Total variation between histograms of the first and second half of the sample.
    pub split_half_tv: f64,
    pub atom_suspects: Vec<AtomSuspect>,
    /// Set when the diagnosed measure is not a convolution power.
    pub not_conv_power: bool,
}

impl AcDiagnosticReport {
    /// Mass threshold above which a cell can be an atom suspect: `100/√N`.
    pub fn atom_mass_floor(samples: usize) -> f64 {
        100.0 / (samples as f64).sqrt()
    }

    pub fn verdict(&self) -> &'static str {
        if self.atom_suspects.is_empty() {
            "no atom suspected"
        } else {
            "ATOM suspected"
        }
    }
}

/// Diagnostics on `sample_count` draws of `measure` (meant for convolution
/// powers, accepted for any measure and flagged otherwise).
pub fn ac_diagnostic(
    measure: &WeightMeasure,
    sample_count: usize,
    cells_per_axis: usize,
    seed: u64,
) -> Result<AcDiagnosticReport> {
    if sample_count < MIN_DIAGNOSTIC_SAMPLES {
        return Err(Error::Usage(format!(
            "absolute-continuity diagnostics need at least {MIN_DIAGNOSTIC_SAMPLES} samples"
        )));
    }
    let samples = measure.sample(seed, sample_count)?;
    let mut report = ac_diagnostic_samples(&samples, cells_per_axis)?;
    report.not_conv_power = !measure.is_conv_power();
    Ok(report)
}

pub fn ac_diagnostic_samples(samples: &[Point], cells_per_axis: usize) -> Result<AcDiagnosticReport> {
    let coarse = estimate_density(samples, cells_per_axis)?;
    let refined = HistogramDensity::on_box(samples, coarse.bounds.clone(), 2 * cells_per_axis)?;
    let n = samples.len();
    let half = n / 2;
    let first = HistogramDensity::on_box(&samples[..half], coarse.bounds.clone(), cells_per_axis)?;
    let second = HistogramDensity::on_box(&samples[half..], coarse.bounds.clone(), cells_per_axis)?;
    let split_half_tv = if half == 0 {
        0.0
    } else {
        0.5 * first
            .counts
            .iter()
            .zip(&second.counts)
            .map(|(a, b)| (*a as f64 / first.total as f64 - *b as f64 / second.total as f64).abs())
            .sum::<f64>()
    };

    let floor = AcDiagnosticReport::atom_mass_floor(n);
    let dim = coarse.dim();
    let mut atom_suspects = Vec::new();
    for (cell, count) in coarse.nonzero_cells() {
        let fraction = count as f64 / n as f64;
        if fraction <= floor {
            continue;
        }
        let refined_fraction = (0..1usize << dim)
            .map(|bits| {
                let child: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .map(|(j, c)| 2 * c + ((bits >> j) & 1))
                    .collect();
                refined.fraction(&child)
            })
            .fold(0.0, f64::max);
        if fraction < ATOM_REFINEMENT_FACTOR * refined_fraction {
            atom_suspects.push(AtomSuspect {
                cell,
                fraction,
                refined_fraction,
            });
        }
    }
    Ok(AcDiagnosticReport {
        samples: n,
        cells_per_axis,
        max_cell_fraction: coarse.max_cell_fraction(),
        max_cell_fraction_refined: refined.max_cell_fraction(),
        split_half_tv,
        atom_suspects,
        not_conv_power: false,
    })
}
