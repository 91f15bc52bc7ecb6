//! Normalized weight measures on ℝ^d.
//!
//! A [`WeightMeasure`] is one of four shapes: a density on a box, a density
//! against the parameter of a smooth curve, the uniform surface measure of a
//! sphere, or an n-fold convolution power of another measure. All of them can
//! be sampled; the first three also have deterministic quadrature rules, and
//! every variant has a Fourier transform
//!
//! ```text
//! ν̂(ξ) = ∫ exp(2πi ξ·r) dν(r)
//! ```
//!
//! Convolution powers are never materialized as densities. They are sampled
//! as sums of independent base draws and transformed as `ν̂(ξ)^n`.

pub mod curves;
mod fourier;
mod nodes;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{config, Error, Result};
use crate::quadrature;
use crate::rng::{par_map, StreamKey};

pub use curves::{Curve, Line, MomentCurve, Semimeridian};
pub use fourier::{FourierEval, FOURIER_TOLERANCE, MAX_QUADRATURE_NODES};

pub type Point = Vec<f64>;

/// Tolerance on total mass for measures whose normalization is checked by quadrature.
pub const MASS_TOLERANCE: f64 = 1e-9;

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type InverseCdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ParamDensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Axis-aligned box `[lo_1, hi_1] × … × [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return config("box bounds must be nonempty and of equal dimension");
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return config("box bounds must be finite");
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return config("box lower bound exceeds upper bound");
        }
        Ok(BoxRegion { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        BoxRegion {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn max_width(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
    }
}

/// How a custom box density is sampled.
#[derive(Clone)]
pub enum SamplerSpec {
    /// Product density: one inverse CDF per axis, mapping U(0,1) into the box.
    InverseCdf(Vec<InverseCdf>),
    /// Rejection from the uniform law on the box; `bound` dominates the density.
    Rejection { bound: f64 },
}

#[derive(Clone)]
pub enum Density {
    /// Constant `1 / volume` on the box.
    Uniform,
    /// Unit mass at the (zero-volume) box; a degenerate stand-in for δ_a.
    PointMass,
    Custom {
        name: String,
        f: DensityFn,
        sampler: SamplerSpec,
    },
}

#[derive(Clone)]
pub struct AcDensity {
    support: BoxRegion,
    density: Density,
}

impl AcDensity {
    pub fn uniform(support: BoxRegion) -> Result<Self> {
        if support.volume() <= 0.0 {
            return config("uniform density needs a box of positive volume");
        }
        Ok(AcDensity {
            support,
            density: Density::Uniform,
        })
    }

    pub fn point_mass(at: Vec<f64>) -> Result<Self> {
        let support = BoxRegion::new(at.clone(), at)?;
        Ok(AcDensity {
            support,
            density: Density::PointMass,
        })
    }

    /// A density on `support`, checked for unit mass by tensor quadrature.
    pub fn custom(
        name: impl Into<String>,
        support: BoxRegion,
        f: DensityFn,
        sampler: SamplerSpec,
    ) -> Result<Self> {
        if support.volume() <= 0.0 {
            return config("density support has zero volume");
        }
        match &sampler {
            SamplerSpec::InverseCdf(axes) if axes.len() != support.dim() => {
                return config("inverse-CDF sampler needs one map per axis");
            }
            SamplerSpec::Rejection { bound } if !(bound.is_finite() && *bound > 0.0) => {
                return config("rejection bound must be positive and finite");
            }
            _ => {}
        }
        let density = AcDensity {
            support,
            density: Density::Custom {
                name: name.into(),
                f,
                sampler,
            },
        };
        let mass = density.checked_mass()?;
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return config(format!("density is not normalized: mass {mass}"));
        }
        Ok(density)
    }

    pub fn support(&self) -> &BoxRegion {
        &self.support
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let inside = x
            .iter()
            .zip(self.support.lo.iter().zip(&self.support.hi))
            .all(|(v, (a, b))| *v >= *a && *v <= *b);
        if !inside {
            return 0.0;
        }
        match &self.density {
            Density::Uniform => 1.0 / self.support.volume(),
            Density::PointMass => f64::INFINITY,
            Density::Custom { f, .. } => f(x),
        }
    }

    fn checked_mass(&self) -> Result<f64> {
        let mut res = 4;
        let mut prev = mass_of(&nodes::box_nodes(self, res)?);
        loop {
            res *= 2;
            let count = nodes::box_node_count(self.dim(), res);
            if count > MAX_QUADRATURE_NODES {
                log::warn!("density mass did not settle below {MAX_QUADRATURE_NODES} nodes");
                return Ok(prev);
            }
            let next = mass_of(&nodes::box_nodes(self, res)?);
            if (next - prev).abs() < 0.1 * MASS_TOLERANCE {
                return Ok(next);
            }
            prev = next;
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let lo = &self.support.lo;
        let hi = &self.support.hi;
        match &self.density {
            Density::Uniform => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                .collect(),
            Density::PointMass => lo.clone(),
            Density::Custom { f, sampler, .. } => match sampler {
                SamplerSpec::InverseCdf(maps) => {
                    maps.iter().map(|q| q(rng.random::<f64>())).collect()
                }
                SamplerSpec::Rejection { bound } => loop {
                    let x: Point = lo
                        .iter()
                        .zip(hi)
                        .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                        .collect();
                    if rng.random::<f64>() * bound < f(&x) {
                        break x;
                    }
                },
            },
        }
    }
}

fn mass_of(nodes: &[(Point, f64)]) -> f64 {
    nodes.iter().map(|(_, w)| w).sum()
}

/// Density of ν against the curve parameter.
#[derive(Clone)]
pub enum ParamWeight {
    /// `1 / (b − a)` on the parameter range.
    Uniform,
    Custom {
        name: String,
        f: ParamDensityFn,
        /// Upper bound of `f` on the range, used for rejection sampling.
        bound: f64,
    },
}

#[derive(Clone)]
pub struct CurveMeasure {
    curve: Arc<dyn Curve>,
    range: (f64, f64),
    weight: ParamWeight,
}

impl CurveMeasure {
    pub fn new(curve: Arc<dyn Curve>, range: (f64, f64), weight: ParamWeight) -> Result<Self> {
        let (a, b) = range;
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return config("curve parameter range must be a finite interval of positive length");
        }
        if curve.dim() == 0 {
            return config("curve must live in ℝ^d with d ≥ 1");
        }
        if let ParamWeight::Custom { f, bound, .. } = &weight {
            if !(bound.is_finite() && *bound > 0.0) {
                return config("rejection bound must be positive and finite");
            }
            let rule = quadrature::composite(a, b, 64);
            if rule.iter().any(|(r, _)| f(*r) < 0.0) {
                return config("curve weight must be nonnegative");
            }
            let mass: f64 = rule.iter().map(|(r, w)| w * f(*r)).sum();
            if (mass - 1.0).abs() > MASS_TOLERANCE {
                return config(format!("curve weight is not normalized: mass {mass}"));
            }
        }
        Ok(CurveMeasure {
            curve,
            range,
            weight,
        })
    }

    pub fn curve(&self) -> &Arc<dyn Curve> {
        &self.curve
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn weight(&self) -> &ParamWeight {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    pub fn weight_at(&self, r: f64) -> f64 {
        let (a, b) = self.range;
        if r < a || r > b {
            return 0.0;
        }
        match &self.weight {
            ParamWeight::Uniform => 1.0 / (b - a),
            ParamWeight::Custom { f, .. } => f(r),
        }
    }

    /// Tangent at parameter `r`: analytic when the curve provides it,
    /// central differences otherwise.
    pub fn tangent(&self, r: f64) -> Vec<f64> {
        self.curve
            .tangent(r)
            .unwrap_or_else(|| curves::finite_difference_tangent(self.curve.as_ref(), r, curves::FD_STEP))
    }

    /// Draw a parameter from the weight.
    pub fn draw_param<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (a, b) = self.range;
        match &self.weight {
            ParamWeight::Uniform => a + (b - a) * rng.random::<f64>(),
            ParamWeight::Custom { f, bound, .. } => loop {
                let r = a + (b - a) * rng.random::<f64>();
                if rng.random::<f64>() * bound < f(r) {
                    break r;
                }
            },
        }
    }

    /// Rough length of the curve image, from a 256-segment polyline.
    pub fn length_estimate(&self) -> f64 {
        let (a, b) = self.range;
        let n = 256;
        let mut prev = self.curve.point(a);
        let mut total = 0.0;
        for i in 1..=n {
            let p = self.curve.point(a + (b - a) * i as f64 / n as f64);
            total += norm(&sub(&p, &prev));
            prev = p;
        }
        total
    }
}

/// Uniform normalized surface measure on the sphere `|x − center| = radius`
/// in ℝ^{center.len()}.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMeasure {
    center: Vec<f64>,
    radius: f64,
}

impl SphereMeasure {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return config("sphere needs an ambient dimension ≥ 1");
        }
        if !(radius.is_finite() && radius > 0.0) {
            return config("sphere radius must be positive and finite");
        }
        if center.iter().any(|c| !c.is_finite()) {
            return config("sphere center must be finite");
        }
        Ok(SphereMeasure { center, radius })
    }

    pub fn unit(ambient_dim: usize) -> Self {
        SphereMeasure {
            center: vec![0.0; ambient_dim.max(1)],
            radius: 1.0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let g: Vec<f64> = (0..self.center.len())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let n = norm(&g);
            if n > 0.0 {
                break g
                    .iter()
                    .zip(&self.center)
                    .map(|(v, c)| c + self.radius * v / n)
                    .collect();
            }
        }
    }
}

#[derive(Clone)]
pub struct ConvPower {
    base: Box<WeightMeasure>,
    n: usize,
}

impl ConvPower {
    pub fn base(&self) -> &WeightMeasure {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[derive(Clone)]
pub enum WeightMeasure {
    AcDensity(AcDensity),
    Curve(CurveMeasure),
    Sphere(SphereMeasure),
    ConvPower(ConvPower),
}

impl WeightMeasure {
    /// Uniform density on `[a, b]` in ℝ¹.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Ok(WeightMeasure::AcDensity(AcDensity::uniform(BoxRegion::new(
            vec![a],
            vec![b],
        )?)?))
    }

    pub fn uniform_box(support: BoxRegion) -> Result<Self> {
        Ok(WeightMeasure::AcDensity(AcDensity::uniform(support)?))
    }

    pub fn point_mass(at: Vec<f64>) -> Result<Self> {
        Ok(WeightMeasure::AcDensity(AcDensity::point_mass(at)?))
    }

    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(WeightMeasure::Sphere(SphereMeasure::new(center, radius)?))
    }

    /// Uniform parameter measure on the moment curve r ↦ (r, r², …, r^d), 0 < r < 1.
    pub fn moment_curve(d: usize) -> Result<Self> {
        if d == 0 {
            return config("moment curve needs d ≥ 1");
        }
        Ok(WeightMeasure::Curve(CurveMeasure::new(
            Arc::new(MomentCurve { dim: d }),
            (0.0, 1.0),
            ParamWeight::Uniform,
        )?))
    }

    /// Normalized measure on the semimeridian of a sphere in ℝ³ through the
    /// equator point at `longitude`: colatitude θ uniform on [0, π].
    pub fn semimeridian(longitude: f64, sphere: &SphereMeasure) -> Result<Self> {
        if sphere.ambient_dim() != 3 {
            return Err(Error::Unsupported(format!(
                "semimeridians are defined for spheres in ℝ³, got ℝ^{}",
                sphere.ambient_dim()
            )));
        }
        let c = sphere.center();
        Ok(WeightMeasure::Curve(CurveMeasure::new(
            Arc::new(Semimeridian {
                center: [c[0], c[1], c[2]],
                radius: sphere.radius(),
                longitude,
            }),
            (0.0, std::f64::consts::PI),
            ParamWeight::Uniform,
        )?))
    }

    /// Uniform parameter measure on the segment r ↦ r·direction, 0 < r < 1.
    pub fn line(direction: Vec<f64>) -> Result<Self> {
        if direction.iter().all(|v| *v == 0.0) {
            return config("line direction must be nonzero");
        }
        Ok(WeightMeasure::Curve(CurveMeasure::new(
            Arc::new(Line { direction }),
            (0.0, 1.0),
            ParamWeight::Uniform,
        )?))
    }

    pub fn conv_power(base: WeightMeasure, n: usize) -> Result<Self> {
        if n == 0 {
            return config("convolution power needs n ≥ 1");
        }
        Ok(WeightMeasure::ConvPower(ConvPower {
            base: Box::new(base),
            n,
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            WeightMeasure::AcDensity(d) => d.dim(),
            WeightMeasure::Curve(c) => c.dim(),
            WeightMeasure::Sphere(s) => s.ambient_dim(),
            WeightMeasure::ConvPower(p) => p.base.dim(),
        }
    }

    pub fn is_conv_power(&self) -> bool {
        matches!(self, WeightMeasure::ConvPower(_))
    }

    /// One draw from the measure using `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            WeightMeasure::AcDensity(d) => d.draw(rng),
            WeightMeasure::Curve(c) => {
                let r = c.draw_param(rng);
                c.curve.point(r)
            }
            WeightMeasure::Sphere(s) => s.draw(rng),
            WeightMeasure::ConvPower(p) => {
                let mut acc = p.base.draw(rng);
                for _ in 1..p.n {
                    let next = p.base.draw(rng);
                    acc.iter_mut().zip(&next).for_each(|(a, b)| *a += b);
                }
                acc
            }
        }
    }

    /// `count` i.i.d. draws; draw `i` uses the stream `(key, i)`.
    pub fn sample_with_key(&self, key: StreamKey, count: usize) -> Result<Vec<Point>> {
        if count == 0 {
            return Err(Error::Usage("sample count must be at least 1".into()));
        }
        Ok(par_map(key, count, |_, rng| self.draw(rng)))
    }

    /// `count` i.i.d. draws, bitwise reproducible for a given seed.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Point>> {
        self.sample_with_key(StreamKey::new(seed), count)
    }

    /// Deterministic rule `(point, weight)` integrating against the measure.
    pub fn quadrature_nodes(&self, resolution: usize) -> Result<Vec<(Point, f64)>> {
        nodes::quadrature_nodes(self, resolution)
    }

    /// `∫ g dν` with the quadrature rule at `resolution`.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, g: F, resolution: usize) -> Result<f64> {
        Ok(self
            .quadrature_nodes(resolution)?
            .iter()
            .map(|(x, w)| w * g(x))
            .sum())
    }

    /// Short human-readable description for run summaries.
    pub fn describe(&self) -> String {
        match self {
            WeightMeasure::AcDensity(d) => {
                let kind = match &d.density {
                    Density::Uniform => "uniform".to_string(),
                    Density::PointMass => "point-mass".to_string(),
                    Density::Custom { name, .. } => name.clone(),
                };
                format!("density {kind} on {:?}x{:?}", d.support.lo, d.support.hi)
            }
            WeightMeasure::Curve(c) => {
                format!("{} on [{}, {}]", c.curve.name(), c.range.0, c.range.1)
            }
            WeightMeasure::Sphere(s) => format!(
                "sphere in R^{} radius {} center {:?}",
                s.ambient_dim(),
                s.radius,
                s.center
            ),
            WeightMeasure::ConvPower(p) => format!("({})^*{}", p.base.describe(), p.n),
        }
    }
}

impl fmt::Debug for WeightMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightMeasure({})", self.describe())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_samples_lie_on_sphere() {
        let s = WeightMeasure::sphere(vec![0.0; 3], 2.0).unwrap();
        for p in s.sample(11, 1000).unwrap() {
            assert!((norm(&p) - 2.0).abs() < 1e-12);
        }
        let s = WeightMeasure::sphere(vec![1.0, -2.0, 0.5, 3.0], 0.7).unwrap();
        for p in s.sample(12, 200).unwrap() {
            let d = sub(&p, &[1.0, -2.0, 0.5, 3.0]);
            assert!((norm(&d) - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn conv_power_of_point_like_mass_shifts_to_sum() {
        let a = [0.3, -0.2];
        let narrow = BoxRegion::new(vec![0.3 - 1e-6, -0.2 - 1e-6], vec![0.3 + 1e-6, -0.2 + 1e-6]).unwrap();
        let base = WeightMeasure::uniform_box(narrow).unwrap();
        let p = WeightMeasure::conv_power(base, 2).unwrap();
        for x in p.sample(5, 500).unwrap() {
            assert!((x[0] - 2.0 * a[0]).abs() < 3e-6);
            assert!((x[1] - 2.0 * a[1]).abs() < 3e-6);
        }
        let delta = WeightMeasure::conv_power(WeightMeasure::point_mass(a.to_vec()).unwrap(), 3).unwrap();
        for x in delta.sample(5, 10).unwrap() {
            assert!((x[0] - 0.9).abs() < 1e-15 && (x[1] + 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_samples_lie_on_curve() {
        let m = WeightMeasure::moment_curve(3).unwrap();
        for p in m.sample(1, 500).unwrap() {
            assert!(p[0] > 0.0 && p[0] < 1.0);
            assert!((p[1] - p[0] * p[0]).abs() < 1e-15);
            assert!((p[2] - p[0] * p[0] * p[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn conv_power_one_matches_base_bitwise() {
        let base = WeightMeasure::moment_curve(2).unwrap();
        let one = WeightMeasure::conv_power(base.clone(), 1).unwrap();
        assert_eq!(base.sample(9, 300).unwrap(), one.sample(9, 300).unwrap());
        assert_eq!(
            base.quadrature_nodes(4).unwrap(),
            one.quadrature_nodes(4).unwrap()
        );
        let xi = [0.7, -1.3];
        assert_eq!(base.fourier(&xi), one.fourier(&xi));
    }

    #[test]
    fn sampling_is_deterministic_across_thread_counts() {
        let m = WeightMeasure::conv_power(WeightMeasure::sphere(vec![0.0; 3], 1.0).unwrap(), 2).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
        let a = one.install(|| m.sample(99, 5000).unwrap());
        let b = many.install(|| m.sample(99, 5000).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, m.sample(100, 5000).unwrap());
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(WeightMeasure::moment_curve(0), Err(Error::Config(_))));
        assert!(matches!(WeightMeasure::sphere(vec![0.0; 3], 0.0), Err(Error::Config(_))));
        assert!(matches!(WeightMeasure::sphere(vec![0.0; 3], -1.0), Err(Error::Config(_))));
        let base = WeightMeasure::interval(0.0, 1.0).unwrap();
        assert!(matches!(WeightMeasure::conv_power(base, 0), Err(Error::Config(_))));
        assert!(matches!(WeightMeasure::interval(1.0, 1.0), Err(Error::Config(_))));
        let curve: Arc<dyn Curve> = Arc::new(MomentCurve { dim: 2 });
        assert!(CurveMeasure::new(curve.clone(), (0.5, 0.5), ParamWeight::Uniform).is_err());
        let bad = ParamWeight::Custom {
            name: "half".into(),
            f: Arc::new(|_| 0.5),
            bound: 1.0,
        };
        assert!(matches!(CurveMeasure::new(curve.clone(), (0.0, 1.0), bad), Err(Error::Config(_))));
        let neg = ParamWeight::Custom {
            name: "neg".into(),
            f: Arc::new(|r| if r > 0.5 { -1.0 } else { 3.0 }),
            bound: 3.0,
        };
        assert!(CurveMeasure::new(curve, (0.0, 1.0), neg).is_err());
        let unnormalized = AcDensity::custom(
            "twice",
            BoxRegion::unit(2),
            Arc::new(|_| 2.0),
            SamplerSpec::Rejection { bound: 2.0 },
        );
        assert!(matches!(unnormalized, Err(Error::Config(_))));
        let flat = AcDensity::custom(
            "flat",
            BoxRegion::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(),
            Arc::new(|_| 1.0),
            SamplerSpec::Rejection { bound: 1.0 },
        );
        assert!(matches!(flat, Err(Error::Config(_))));
        let s = SphereMeasure::new(vec![0.0; 4], 1.0).unwrap();
        assert!(matches!(WeightMeasure::semimeridian(0.0, &s), Err(Error::Unsupported(_))));
        assert!(matches!(
            WeightMeasure::moment_curve(2).unwrap().sample(1, 0),
            Err(Error::Usage(_))
        ));
    }
}
