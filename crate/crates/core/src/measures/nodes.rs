//! Deterministic quadrature rules for the non-convolution variants.

use std::f64::consts::PI;

use super::{AcDensity, Density, Point, SphereMeasure, WeightMeasure};
use crate::error::{config, Error, Result};
use crate::quadrature::{composite, PANEL_ORDER};

/// Hard ceiling on the size of any single rule.
const NODE_CEILING: usize = 1 << 26;

pub(super) fn quadrature_nodes(measure: &WeightMeasure, resolution: usize) -> Result<Vec<(Point, f64)>> {
    if resolution < 2 {
        return config("quadrature resolution must be at least 2");
    }
    match measure {
        WeightMeasure::AcDensity(d) => box_nodes(d, resolution),
        WeightMeasure::Curve(c) => {
            let (a, b) = c.range();
            Ok(composite(a, b, resolution)
                .into_iter()
                .map(|(r, w)| (c.curve().point(r), w * c.weight_at(r)))
                .collect())
        }
        WeightMeasure::Sphere(s) => sphere_nodes(s, resolution),
        WeightMeasure::ConvPower(p) if p.n() == 1 => quadrature_nodes(p.base(), resolution),
        WeightMeasure::ConvPower(_) => Err(Error::Unsupported(
            "convolution powers have no quadrature rule; use sampling or the Fourier transform".into(),
        )),
    }
}

pub(super) fn box_node_count(dim: usize, resolution: usize) -> usize {
    (resolution * PANEL_ORDER).saturating_pow(dim as u32)
}

/// Tensor-product composite Gauss rule over the support box, weighted by the density.
pub(super) fn box_nodes(d: &AcDensity, resolution: usize) -> Result<Vec<(Point, f64)>> {
    if let Density::PointMass = d.density() {
        return Ok(vec![(d.support().lo.clone(), 1.0)]);
    }
    let dim = d.dim();
    if box_node_count(dim, resolution) > NODE_CEILING {
        return config(format!(
            "tensor rule with resolution {resolution} in {dim} dimensions is too large"
        ));
    }
    let axes: Vec<Vec<(f64, f64)>> = (0..dim)
        .map(|j| composite(d.support().lo[j], d.support().hi[j], resolution))
        .collect();
    let mut out = vec![(Vec::with_capacity(dim), 1.0)];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for (p, w) in &out {
            for (x, wx) in axis {
                let mut q = p.clone();
                q.push(*x);
                next.push((q, w * wx));
            }
        }
        out = next;
    }
    Ok(match d.density() {
        Density::Uniform => {
            let vol = d.support().volume();
            out.into_iter().map(|(p, w)| (p, w / vol)).collect()
        }
        Density::Custom { f, .. } => out
            .into_iter()
            .map(|(p, w)| {
                let v = f(&p);
                (p, w * v)
            })
            .collect(),
        Density::PointMass => unreachable!(),
    })
}

pub(super) fn sphere_node_count(ambient: usize, resolution: usize) -> usize {
    let per_axis = resolution * PANEL_ORDER;
    match ambient {
        1 => 2,
        _ => per_axis.saturating_pow(ambient as u32 - 1),
    }
}

fn sphere_nodes(s: &SphereMeasure, resolution: usize) -> Result<Vec<(Point, f64)>> {
    if sphere_node_count(s.ambient_dim(), resolution) > NODE_CEILING {
        return config(format!(
            "sphere rule with resolution {resolution} in ℝ^{} is too large",
            s.ambient_dim()
        ));
    }
    let unit = unit_sphere_nodes(s.ambient_dim(), resolution);
    Ok(unit
        .into_iter()
        .map(|(u, w)| {
            let p = u
                .iter()
                .zip(s.center())
                .map(|(x, c)| c + s.radius() * x)
                .collect();
            (p, w)
        })
        .collect())
}

/// Product rule for the normalized surface measure of the unit sphere in ℝ^n.
///
/// n = 2: equispaced angles. n ≥ 3: composite Gauss in the last polar angle
/// with weight sin^{n−2}θ, recursing on the equatorial sphere. The angle, not
/// cos θ, is the Gauss variable: plane waves oscillate at a bounded rate in θ
/// but arbitrarily fast in cos θ near the poles.
fn unit_sphere_nodes(n: usize, resolution: usize) -> Vec<(Point, f64)> {
    let per_axis = resolution * PANEL_ORDER;
    match n {
        1 => vec![(vec![-1.0], 0.5), (vec![1.0], 0.5)],
        2 => (0..per_axis)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / per_axis as f64;
                (vec![phi.cos(), phi.sin()], 1.0 / per_axis as f64)
            })
            .collect(),
        _ => {
            let theta_rule = composite(0.0, PI, resolution);
            let raw: Vec<f64> = theta_rule
                .iter()
                .map(|(t, w)| w * t.sin().powi(n as i32 - 2))
                .collect();
            let total: f64 = raw.iter().sum();
            let inner = unit_sphere_nodes(n - 1, resolution);
            let mut out = Vec::with_capacity(theta_rule.len() * inner.len());
            for ((theta, _), w) in theta_rule.iter().zip(&raw) {
                let (st, ct) = theta.sin_cos();
                for (q, wq) in &inner {
                    let mut p: Vec<f64> = q.iter().map(|x| st * x).collect();
                    p.push(ct);
                    out.push((p, w / total * wq));
                }
            }
            out
        }
    }
}
