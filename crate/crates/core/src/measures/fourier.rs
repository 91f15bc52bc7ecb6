//! ν̂(ξ) = ∫ exp(2πi ξ·r) dν(r).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{dot, norm, AcDensity, Density, SphereMeasure, WeightMeasure};
use crate::error::{Error, Result};

/// Target accuracy of quadrature-evaluated transforms.
pub const FOURIER_TOLERANCE: f64 = 1e-8;

/// Resolution doubling stops once a rule would exceed this many nodes.
pub const MAX_QUADRATURE_NODES: usize = 1 << 20;

/// Phase advance (radians) covered by one composite panel at the starting resolution.
const RADIANS_PER_PANEL: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierEval {
    pub value: Complex64,
    /// Resolution of the last rule evaluated (0 for closed forms).
    pub resolution: usize,
    /// Whether successive doublings agreed to the target tolerance.
    pub converged: bool,
}

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// sin(x)/x with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl WeightMeasure {
    /// Fourier transform at `xi`, closed form where one is known and
    /// adaptive quadrature otherwise.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        let eval = self.fourier_eval(xi);
        if !eval.converged {
            log::warn!(
                "fourier transform of {} at |ξ| = {} hit the {} node cap",
                self.describe(),
                norm(xi),
                MAX_QUADRATURE_NODES
            );
        }
        eval.value
    }

    pub fn fourier_eval(&self, xi: &[f64]) -> FourierEval {
        assert_eq!(xi.len(), self.dim(), "frequency dimension mismatch");
        let closed = |value| FourierEval {
            value,
            resolution: 0,
            converged: true,
        };
        if xi.iter().all(|v| *v == 0.0) {
            return closed(Complex64::new(1.0, 0.0));
        }
        match self {
            WeightMeasure::AcDensity(d) => match d.density() {
                Density::Uniform => closed(uniform_box_transform(d, xi)),
                Density::PointMass => closed(cis(2.0 * PI * dot(xi, &d.support().lo))),
                Density::Custom { .. } => self.adaptive(xi),
            },
            WeightMeasure::Sphere(s) if s.ambient_dim() <= 3 && s.ambient_dim() != 2 => {
                closed(sphere_transform(s, xi))
            }
            WeightMeasure::ConvPower(p) => {
                let base = p.base().fourier_eval(xi);
                let mut value = base.value;
                for _ in 1..p.n() {
                    value *= base.value;
                }
                FourierEval { value, ..base }
            }
            _ => self.adaptive(xi),
        }
    }

    /// Transform by quadrature only, doubling the resolution until two
    /// successive rules agree within `tolerance` or the node cap is reached.
    pub fn fourier_by_quadrature(&self, xi: &[f64], tolerance: f64) -> Result<FourierEval> {
        if self.is_conv_power() {
            return Err(Error::Unsupported(
                "convolution powers are transformed through their base".into(),
            ));
        }
        let mut res = self.suggested_resolution(norm(xi));
        let mut prev = self.quadrature_fourier(xi, res)?;
        loop {
            let next_res = 2 * res;
            if self.node_count(next_res) > MAX_QUADRATURE_NODES {
                return Ok(FourierEval {
                    value: prev,
                    resolution: res,
                    converged: false,
                });
            }
            let next = self.quadrature_fourier(xi, next_res)?;
            if (next - prev).norm() <= tolerance {
                return Ok(FourierEval {
                    value: next,
                    resolution: next_res,
                    converged: true,
                });
            }
            prev = next;
            res = next_res;
        }
    }

    fn adaptive(&self, xi: &[f64]) -> FourierEval {
        self.fourier_by_quadrature(xi, FOURIER_TOLERANCE)
            .expect("quadrature is available for every non-convolution variant")
    }

    fn quadrature_fourier(&self, xi: &[f64], resolution: usize) -> Result<Complex64> {
        Ok(self
            .quadrature_nodes(resolution)?
            .iter()
            .map(|(x, w)| cis(2.0 * PI * dot(xi, x)) * *w)
            .sum())
    }

    fn node_count(&self, resolution: usize) -> usize {
        match self {
            WeightMeasure::AcDensity(d) => super::nodes::box_node_count(d.dim(), resolution),
            WeightMeasure::Curve(_) => resolution * crate::quadrature::PANEL_ORDER,
            WeightMeasure::Sphere(s) => super::nodes::sphere_node_count(s.ambient_dim(), resolution),
            WeightMeasure::ConvPower(p) => p.base().node_count(resolution),
        }
    }

    /// Quadrature resolution that resolves `exp(2πi ξ·r)` for `|ξ| = xi_norm`
    /// with a few radians of phase per panel.
    pub fn suggested_resolution(&self, xi_norm: f64) -> usize {
        let extent = match self {
            WeightMeasure::AcDensity(d) => d.support().max_width(),
            WeightMeasure::Curve(c) => c.length_estimate(),
            WeightMeasure::Sphere(s) => 2.0 * s.radius(),
            WeightMeasure::ConvPower(p) => p.n() as f64 * extent_of(p.base()),
        };
        let phase = 2.0 * PI * xi_norm * extent;
        ((phase / RADIANS_PER_PANEL).ceil() as usize).max(4)
    }
}

fn extent_of(m: &WeightMeasure) -> f64 {
    match m {
        WeightMeasure::AcDensity(d) => d.support().max_width(),
        WeightMeasure::Curve(c) => c.length_estimate(),
        WeightMeasure::Sphere(s) => 2.0 * s.radius(),
        WeightMeasure::ConvPower(p) => p.n() as f64 * extent_of(p.base()),
    }
}

/// Product over axes of e^{πiξ(a+b)}·sin(πξ(b−a))/(πξ(b−a)).
fn uniform_box_transform(d: &AcDensity, xi: &[f64]) -> Complex64 {
    let b = d.support();
    xi.iter()
        .zip(b.lo.iter().zip(&b.hi))
        .map(|(x, (lo, hi))| cis(PI * x * (lo + hi)) * sinc(PI * x * (hi - lo)))
        .product()
}

/// ℝ¹: cos(2πRξ); ℝ³: sin(2πR|ξ|)/(2πR|ξ|); both times the center phase.
fn sphere_transform(s: &SphereMeasure, xi: &[f64]) -> Complex64 {
    let k = 2.0 * PI * s.radius() * norm(xi);
    let radial = match s.ambient_dim() {
        1 => k.cos(),
        3 => sinc(k),
        n => unreachable!("no closed form wired for ℝ^{n}"),
    };
    cis(2.0 * PI * dot(xi, s.center())) * radial
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{BoxRegion, SamplerSpec};
    use std::sync::Arc;

    #[test]
    fn transform_at_zero_is_exactly_one() {
        let ms = vec![
            WeightMeasure::interval(0.0, 1.0).unwrap(),
            WeightMeasure::moment_curve(3).unwrap(),
            WeightMeasure::sphere(vec![1.0, 2.0, 3.0], 2.0).unwrap(),
            WeightMeasure::sphere(vec![0.0, 0.0], 1.0).unwrap(),
            WeightMeasure::conv_power(WeightMeasure::moment_curve(2).unwrap(), 3).unwrap(),
        ];
        for m in ms {
            let z = vec![0.0; m.dim()];
            assert_eq!(m.fourier(&z), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn von_neumann_weight_vanishes_at_integers() {
        let h = WeightMeasure::interval(0.0, 1.0).unwrap();
        for k in 1..5 {
            assert!(h.fourier(&[k as f64]).norm() < 1e-15);
            let q = h.fourier_by_quadrature(&[k as f64], 1e-12).unwrap();
            assert!(q.value.norm() < 1e-12);
        }
        // analytic antiderivative: (e^{2πiξ} − 1)/(2πiξ)
        let xi = 0.37;
        let exact = (cis(2.0 * PI * xi) - 1.0) / Complex64::new(0.0, 2.0 * PI * xi);
        assert!((h.fourier(&[xi]) - exact).norm() < 1e-15);
    }

    #[test]
    fn unit_sphere_at_half() {
        let s = WeightMeasure::sphere(vec![0.0; 3], 1.0).unwrap();
        let xi = [0.3, 0.0, 0.4];
        assert!(s.fourier(&xi).norm() < 1e-15);
        let q = s.quadrature_fourier(&xi, 64).unwrap();
        assert!(q.norm() < 1e-12, "{q}");
    }

    #[test]
    fn circle_matches_bessel_series() {
        // J0(x) = Σ (−1)^m (x/2)^{2m} / (m!)²
        let s = WeightMeasure::sphere(vec![0.0, 0.0], 1.0).unwrap();
        let xi = [0.25, 0.1];
        let x = 2.0 * PI * norm(&xi);
        let mut term = 1.0;
        let mut j0 = 1.0;
        for m in 1..40 {
            term *= -(x / 2.0).powi(2) / (m as f64).powi(2);
            j0 += term;
        }
        assert!((s.fourier(&xi) - j0).norm() < 1e-10);
    }

    #[test]
    fn custom_density_transform() {
        // density 2r on [0,1]: ν̂(ξ) = 2∫ r e^{2πiξr} dr
        let d = crate::measures::AcDensity::custom(
            "2r",
            BoxRegion::unit(1),
            Arc::new(|x: &[f64]| 2.0 * x[0]),
            SamplerSpec::InverseCdf(vec![Arc::new(|u: f64| u.sqrt())]),
        )
        .unwrap();
        let m = WeightMeasure::AcDensity(d);
        let xi = 1.7;
        let w = 2.0 * PI * xi;
        let i = Complex64::i();
        let exact = 2.0 * ((cis(w) * (1.0 / (i * w)) + (cis(w) - 1.0) / (w * w)));
        let got = m.fourier(&[xi]);
        assert!((got - exact).norm() < 1e-9, "{got} vs {exact}");
    }

    #[test]
    fn conv_power_is_base_power() {
        let base = WeightMeasure::moment_curve(2).unwrap();
        let p = WeightMeasure::conv_power(base.clone(), 2).unwrap();
        let xi = [1.3, -0.4];
        let b = base.fourier(&xi);
        assert_eq!(p.fourier(&xi), b * b);
    }
}
