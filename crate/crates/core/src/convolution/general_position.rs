use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::measures::{CurveMeasure, WeightMeasure};
use crate::rng::{par_map, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralPositionReport {
    pub dim: usize,
    pub trials: usize,
    /// Trials with `|det| < threshold`.
    pub failures: usize,
    pub min_abs_det: f64,
    pub threshold: f64,
}

impl GeneralPositionReport {
    /// Combine two reports over disjoint trials at the same threshold.
    pub fn merge(self, other: Self) -> Self {
        GeneralPositionReport {
            trials: self.trials + other.trials,
            failures: self.failures + other.failures,
            min_abs_det: self.min_abs_det.min(other.min_abs_det),
            ..self
        }
    }
}

/// Determinant of the matrix whose columns are the tangents at `params`
/// (one parameter per dimension). In one dimension, the tangent's length.
pub fn tangent_determinant(curve: &CurveMeasure, params: &[f64]) -> Result<f64> {
    let d = curve.dim();
    if params.len() != d {
        return config(format!("need {d} parameters for a curve in ℝ^{d}"));
    }
    if d == 1 {
        return Ok(curve.tangent(params[0])[0].abs());
    }
    let tangents: Vec<Vec<f64>> = params.iter().map(|r| curve.tangent(*r)).collect();
    Ok(DMatrix::from_fn(d, d, |i, j| tangents[j][i]).determinant())
}

/// Draw `dim` parameters from the curve's weight per trial and record how
/// close the tangent system comes to linear dependence.
pub fn general_position_check(
    measure: &WeightMeasure,
    trials: usize,
    threshold: f64,
    seed: u64,
) -> Result<GeneralPositionReport> {
    let WeightMeasure::Curve(curve) = measure else {
        return Err(Error::Unsupported("general position is checked for curve measures".into()));
    };
    if trials == 0 {
        return Err(Error::Usage("need at least one trial".into()));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return config("threshold must be positive and finite");
    }
    let d = curve.dim();
    let dets = par_map(StreamKey::new(seed), trials, |_, rng| {
        let params: Vec<f64> = (0..d).map(|_| curve.draw_param(rng)).collect();
        tangent_determinant(curve, &params).map(f64::abs)
    });
    let mut report = GeneralPositionReport {
        dim: d,
        trials: 0,
        failures: 0,
        min_abs_det: f64::INFINITY,
        threshold,
    };
    for det in dets {
        let det = det?;
        report = report.merge(GeneralPositionReport {
            trials: 1,
            failures: usize::from(det < threshold),
            min_abs_det: det,
            ..report
        });
    }
    Ok(report)
}
