//! The sum map `(θ, φ, ψ) ↦ m_γ(θ) + p(φ, ψ)` from (semimeridian point,
//! sphere point) pairs into ℝ³, and the disintegration of the sphere measure
//! over longitudes.
//!
//! Sphere points use angles about the x-axis:
//! `p(φ, ψ) = c + R(cos φ, sin φ cos ψ, sin φ sin ψ)`. This keeps the north
//! pole (0, 0, 1) a regular point of the chart; the chart is singular at
//! `(±R, 0, 0)`. With this chart the Jacobian is
//! `det = R³ sin φ · (m̂′(θ) · p̂)`, where `m̂′` is the unit meridian tangent.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::measures::{Curve, Semimeridian, SphereMeasure, WeightMeasure};
use crate::rng::{par_map, StreamKey};
use crate::stats::{ks_critical_two_sample, ks_two_sample};

/// Degeneracy threshold for `|det|` on the unit sphere; scaled by R³.
pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 1e-6;
pub const MIN_SCAN_TRIALS: usize = 1_000;
pub const MIN_DISINTEGRATION_SAMPLES: usize = 10_000;

const SINGULAR_EPS: f64 = 1e-12;

fn require_r3(sphere: &SphereMeasure) -> Result<()> {
    if sphere.ambient_dim() != 3 {
        return Err(Error::Unsupported(format!(
            "sum-map geometry is implemented for spheres in ℝ³, got ℝ^{}",
            sphere.ambient_dim()
        )));
    }
    Ok(())
}

pub fn sphere_point(sphere: &SphereMeasure, phi: f64, psi: f64) -> [f64; 3] {
    let c = sphere.center();
    let r = sphere.radius();
    let (sp, cp) = phi.sin_cos();
    let (ss, cs) = psi.sin_cos();
    [c[0] + r * cp, c[1] + r * sp * cs, c[2] + r * sp * ss]
}

/// Chart angles `(φ, ψ)` of a point on the sphere.
pub fn sphere_angles(sphere: &SphereMeasure, p: &[f64]) -> (f64, f64) {
    let c = sphere.center();
    let r = sphere.radius();
    let u = [(p[0] - c[0]) / r, (p[1] - c[1]) / r, (p[2] - c[2]) / r];
    let phi = u[0].clamp(-1.0, 1.0).acos();
    let psi = u[2].atan2(u[1]);
    (phi, psi)
}

fn columns(longitude: f64, theta: f64, phi: f64, psi: f64, sphere: &SphereMeasure) -> [[f64; 3]; 3] {
    let r = sphere.radius();
    let (st, ct) = theta.sin_cos();
    let (sg, cg) = longitude.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (ss, cs) = psi.sin_cos();
    [
        [r * ct * cg, r * ct * sg, -r * st],
        [-r * sp, r * cp * cs, r * cp * ss],
        [0.0, -r * sp * ss, r * sp * cs],
    ]
}

fn triple(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianEval {
    pub det: f64,
    /// The inputs sit on a chart singularity (semimeridian endpoint or `sin φ = 0`).
    pub coordinate_singular: bool,
}

/// Determinant of `[∂/∂θ, ∂/∂φ, ∂/∂ψ](m_γ(θ) + p(φ, ψ))` from analytic derivatives.
pub fn sum_map_jacobian(
    longitude: f64,
    theta: f64,
    (phi, psi): (f64, f64),
    sphere: &SphereMeasure,
) -> Result<JacobianEval> {
    require_r3(sphere)?;
    let [a, b, c] = columns(longitude, theta, phi, psi, sphere);
    let singular = theta.sin().abs() < SINGULAR_EPS || phi.sin().abs() < SINGULAR_EPS;
    Ok(JacobianEval {
        det: triple(&a, &b, &c),
        coordinate_singular: singular,
    })
}

/// The same determinant from central differences of the sum map.
pub fn sum_map_jacobian_fd(
    longitude: f64,
    theta: f64,
    (phi, psi): (f64, f64),
    sphere: &SphereMeasure,
    step: f64,
) -> Result<f64> {
    require_r3(sphere)?;
    let meridian = semimeridian(longitude, sphere);
    let sum = |th: f64, ph: f64, ps: f64| {
        let m = meridian.point(th);
        let p = sphere_point(sphere, ph, ps);
        [m[0] + p[0], m[1] + p[1], m[2] + p[2]]
    };
    let diff = |f: &dyn Fn(f64) -> [f64; 3], x: f64| {
        let (u, v) = (f(x + step), f(x - step));
        [
            (u[0] - v[0]) / (2.0 * step),
            (u[1] - v[1]) / (2.0 * step),
            (u[2] - v[2]) / (2.0 * step),
        ]
    };
    let a = diff(&|x| sum(x, phi, psi), theta);
    let b = diff(&|x| sum(theta, x, psi), phi);
    let c = diff(&|x| sum(theta, phi, x), psi);
    Ok(triple(&a, &b, &c))
}

fn semimeridian(longitude: f64, sphere: &SphereMeasure) -> Semimeridian {
    let c = sphere.center();
    Semimeridian {
        center: [c[0], c[1], c[2]],
        radius: sphere.radius(),
        longitude,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianScan {
    pub trials: usize,
    pub degenerate: usize,
    pub fraction: f64,
    /// Threshold in unit-sphere units, as requested.
    pub threshold: f64,
    /// Threshold actually applied: `threshold · R³`.
    pub scaled_threshold: f64,
}

/// Fraction of random (meridian point, sphere point) pairs with `|det| < threshold·R³`.
///
/// Longitude is uniform on [0, 2π), colatitude uniform on [0, π] (the
/// semimeridian weight), and the sphere point uniform on the sphere.
pub fn jacobian_scan(
    sphere: &SphereMeasure,
    trials: usize,
    threshold: f64,
    seed: u64,
) -> Result<JacobianScan> {
    require_r3(sphere)?;
    if trials < MIN_SCAN_TRIALS {
        return Err(Error::Usage(format!("jacobian scan needs at least {MIN_SCAN_TRIALS} trials")));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return config("degeneracy threshold must be positive and finite");
    }
    let scaled = threshold * sphere.radius().powi(3);
    let flags = par_map(StreamKey::new(seed), trials, |_, rng| {
        let longitude = 2.0 * PI * rng.random::<f64>();
        let theta = PI * rng.random::<f64>();
        let phi = (1.0 - 2.0 * rng.random::<f64>()).acos();
        let psi = 2.0 * PI * rng.random::<f64>();
        let [a, b, c] = columns(longitude, theta, phi, psi, sphere);
        triple(&a, &b, &c).abs() < scaled
    });
    let degenerate = flags.iter().filter(|d| **d).count();
    Ok(JacobianScan {
        trials,
        degenerate,
        fraction: degenerate as f64 / trials as f64,
        threshold,
        scaled_threshold: scaled,
    })
}

/// Law of the colatitude on the semimeridian in the second sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ColatitudeLaw {
    /// Density sin(θ)/2: the conditional law of the uniform sphere measure.
    SineHalf,
    /// Uniform on [0, π]: the semimeridian measure itself (wrong on purpose).
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisintegrationReport {
    pub samples: usize,
    pub law: ColatitudeLaw,
    /// Two-sample KS statistic for each coordinate.
    pub ks: [f64; 3],
    pub max_ks: f64,
    pub alpha: f64,
    pub critical_value: f64,
}

impl DisintegrationReport {
    pub fn consistent(&self) -> bool {
        self.max_ks < self.critical_value
    }
}

/// Compare uniform sphere draws against (longitude uniform, colatitude drawn
/// from `law` along the semimeridian at that longitude).
pub fn disintegration_test(
    sphere: &SphereMeasure,
    sample_count: usize,
    seed: u64,
    law: ColatitudeLaw,
) -> Result<DisintegrationReport> {
    require_r3(sphere)?;
    if sample_count < MIN_DISINTEGRATION_SAMPLES {
        return Err(Error::Usage(format!(
            "disintegration test needs at least {MIN_DISINTEGRATION_SAMPLES} samples"
        )));
    }
    let direct = WeightMeasure::Sphere(sphere.clone()).sample_with_key(StreamKey::with_domain(seed, 0), sample_count)?;
    let fibered = par_map(StreamKey::with_domain(seed, 1), sample_count, |_, rng| {
        let longitude = 2.0 * PI * rng.random::<f64>();
        let theta = match law {
            ColatitudeLaw::SineHalf => (1.0 - 2.0 * rng.random::<f64>()).acos(),
            ColatitudeLaw::Uniform => PI * rng.random::<f64>(),
        };
        semimeridian(longitude, sphere).point(theta)
    });
    let mut ks = [0.0; 3];
    for (j, slot) in ks.iter_mut().enumerate() {
        let a: Vec<f64> = direct.iter().map(|p| p[j]).collect();
        let b: Vec<f64> = fibered.iter().map(|p| p[j]).collect();
        *slot = ks_two_sample(&a, &b);
    }
    let alpha = 0.01;
    Ok(DisintegrationReport {
        samples: sample_count,
        law,
        max_ks: ks.iter().copied().fold(0.0, f64::max),
        ks,
        alpha,
        critical_value: ks_critical_two_sample(sample_count, sample_count, alpha),
    })
}
