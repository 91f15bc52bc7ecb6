//! Built-in curves that curve-supported measures can live on.
//!
//! Curves are a registry of named parameterizations rather than parsed
//! expressions. Each built-in supplies its tangent analytically; other
//! implementors may rely on [`finite_difference_tangent`].

use std::fmt;

/// Step used for central-difference tangents.
pub const FD_STEP: f64 = 1e-6;

pub trait Curve: Send + Sync {
    fn dim(&self) -> usize;
    fn point(&self, r: f64) -> Vec<f64>;
    /// Analytic tangent, if the curve knows it.
    fn tangent(&self, _r: f64) -> Option<Vec<f64>> {
        None
    }
    fn name(&self) -> String;
}

impl fmt::Debug for dyn Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve({})", self.name())
    }
}

pub fn finite_difference_tangent(curve: &dyn Curve, r: f64, step: f64) -> Vec<f64> {
    let fwd = curve.point(r + step);
    let bwd = curve.point(r - step);
    fwd.iter()
        .zip(&bwd)
        .map(|(a, b)| (a - b) / (2.0 * step))
        .collect()
}

/// r ↦ (r, r², …, r^d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCurve {
    pub dim: usize,
}

impl Curve for MomentCurve {
    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, r: f64) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.dim);
        let mut acc = 1.0;
        for _ in 0..self.dim {
            acc *= r;
            p.push(acc);
        }
        p
    }

    /// (1, 2r, …, d·r^{d−1})
    fn tangent(&self, r: f64) -> Option<Vec<f64>> {
        let mut t = Vec::with_capacity(self.dim);
        let mut acc = 1.0;
        for j in 1..=self.dim {
            t.push(j as f64 * acc);
            acc *= r;
        }
        Some(t)
    }

    fn name(&self) -> String {
        format!("moment-curve(d={})", self.dim)
    }
}

/// Half great circle from the north pole to the south pole of a sphere in ℝ³
/// through the equator point at `longitude`, parameterized by colatitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Semimeridian {
    pub center: [f64; 3],
    pub radius: f64,
    pub longitude: f64,
}

impl Curve for Semimeridian {
    fn dim(&self) -> usize {
        3
    }

    fn point(&self, theta: f64) -> Vec<f64> {
        let (st, ct) = theta.sin_cos();
        let (sg, cg) = self.longitude.sin_cos();
        vec![
            self.center[0] + self.radius * st * cg,
            self.center[1] + self.radius * st * sg,
            self.center[2] + self.radius * ct,
        ]
    }

    fn tangent(&self, theta: f64) -> Option<Vec<f64>> {
        let (st, ct) = theta.sin_cos();
        let (sg, cg) = self.longitude.sin_cos();
        Some(vec![
            self.radius * ct * cg,
            self.radius * ct * sg,
            -self.radius * st,
        ])
    }

    fn name(&self) -> String {
        format!(
            "semimeridian(longitude={}, radius={}, center={:?})",
            self.longitude, self.radius, self.center
        )
    }
}

/// r ↦ r·direction. Every pair of tangents is parallel.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub direction: Vec<f64>,
}

impl Curve for Line {
    fn dim(&self) -> usize {
        self.direction.len()
    }

    fn point(&self, r: f64) -> Vec<f64> {
        self.direction.iter().map(|v| r * v).collect()
    }

    fn tangent(&self, _r: f64) -> Option<Vec<f64>> {
        Some(self.direction.clone())
    }

    fn name(&self) -> String {
        format!("line(direction={:?})", self.direction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_curve_point_and_tangent() {
        let c = MomentCurve { dim: 2 };
        assert_eq!(c.point(0.5), vec![0.5, 0.25]);
        let c = MomentCurve { dim: 3 };
        assert_eq!(c.tangent(1.0).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn analytic_tangents_match_finite_differences() {
        let curves: Vec<Box<dyn Curve>> = vec![
            Box::new(MomentCurve { dim: 5 }),
            Box::new(Semimeridian {
                center: [0.3, -1.0, 2.0],
                radius: 1.7,
                longitude: 0.9,
            }),
            Box::new(Line {
                direction: vec![1.0, -2.0],
            }),
        ];
        for c in &curves {
            for r in [0.1, 0.45, 0.9] {
                let a = c.tangent(r).unwrap();
                let fd = finite_difference_tangent(c.as_ref(), r, FD_STEP);
                for (x, y) in a.iter().zip(&fd) {
                    assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()), "{}", c.name());
                }
            }
        }
    }
}
