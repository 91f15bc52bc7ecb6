//! The averaging operator `P_t f(x) = ∫ f(T_{t·r} x) dν(r)` on torus multiflows.
//!
//! On a character `e_k`, `P_t` acts by multiplication with `ν̂(t·Aᵀk)`, so for
//! a trigonometric polynomial the whole operator is a Fourier multiplier and
//! `‖P_t f − ∫f dμ‖₁` reduces to an L¹ norm of another trigonometric
//! polynomial. Sampling and quadrature evaluate `P_t f(x)` directly from the
//! definition and are checked against that multiplier.

use std::collections::BTreeMap;
use std::ops::Add;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::lattice::Rank1Lattice;
use crate::measures::WeightMeasure;
use crate::multiflow::{ErgodicityCertificate, TorusMultiflow, TrigObservable, DEFAULT_CERTIFICATE_RADIUS};
use crate::rng::{derive_seed, par_sum, StreamKey};
use crate::stats::least_squares_slope;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AverageMode {
    MonteCarlo { count: usize, seed: u64 },
    Quadrature { resolution: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageEstimate {
    pub value: Complex64,
    /// Standard error of a Monte-Carlo estimate, `sqrt((var Re + var Im) / n)`.
    pub std_error: Option<f64>,
    pub samples: usize,
}

/// Running sums for the mean and variance of complex samples.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    re: f64,
    im: f64,
    re2: f64,
    im2: f64,
}

impl Moments {
    fn of(v: Complex64) -> Self {
        Moments {
            n: 1.0,
            re: v.re,
            im: v.im,
            re2: v.re * v.re,
            im2: v.im * v.im,
        }
    }

    fn mean(&self) -> Complex64 {
        Complex64::new(self.re / self.n, self.im / self.n)
    }

    fn std_error(&self) -> f64 {
        if self.n < 2.0 {
            return f64::INFINITY;
        }
        let var = |s: f64, s2: f64| ((s2 - s * s / self.n) / (self.n - 1.0)).max(0.0);
        ((var(self.re, self.re2) + var(self.im, self.im2)) / self.n).sqrt()
    }
}

impl Add for Moments {
    type Output = Moments;
    fn add(self, o: Moments) -> Moments {
        Moments {
            n: self.n + o.n,
            re: self.re + o.re,
            im: self.im + o.im,
            re2: self.re2 + o.re2,
            im2: self.im2 + o.im2,
        }
    }
}

fn check_compatible(flow: &TorusMultiflow, obs: &TrigObservable, measure: &WeightMeasure, t: f64) -> Result<()> {
    if flow.time_dim() != measure.dim() {
        return config(format!(
            "flow has {}-dimensional time but the measure lives in ℝ^{}",
            flow.time_dim(),
            measure.dim()
        ));
    }
    if obs.torus_dim() != flow.torus_dim() {
        return config(format!(
            "observable lives on the {}-torus but the flow on the {}-torus",
            obs.torus_dim(),
            flow.torus_dim()
        ));
    }
    if !(t.is_finite() && t > 0.0) {
        return config("averaging scale t must be positive and finite");
    }
    Ok(())
}

/// `P_t f(x)` evaluated from its definition, by sampling ν or by quadrature against ν.
pub fn average_pointwise(
    flow: &TorusMultiflow,
    obs: &TrigObservable,
    measure: &WeightMeasure,
    t: f64,
    x: &[f64],
    mode: AverageMode,
) -> Result<AverageEstimate> {
    check_compatible(flow, obs, measure, t)?;
    if x.len() != flow.torus_dim() {
        return config("torus point has the wrong dimension");
    }
    let along = |r: &[f64]| {
        let s: Vec<f64> = r.iter().map(|v| t * v).collect();
        obs.evaluate(&flow.act(&s, x))
    };
    match mode {
        AverageMode::MonteCarlo { count, seed } => {
            if count < 2 {
                return Err(Error::Usage("Monte-Carlo averaging needs at least 2 samples".into()));
            }
            let key = StreamKey::new(seed);
            let m = par_sum(count, Moments::default(), |i| {
                let r = measure.draw(&mut key.rng(i as u64));
                Moments::of(along(&r))
            });
            Ok(AverageEstimate {
                value: m.mean(),
                std_error: Some(m.std_error()),
                samples: count,
            })
        }
        AverageMode::Quadrature { resolution } => {
            let nodes = measure.quadrature_nodes(resolution)?;
            let value = par_sum(nodes.len(), Complex64::default(), |i| {
                let (r, w) = &nodes[i];
                along(r) * *w
            });
            Ok(AverageEstimate {
                value,
                std_error: None,
                samples: nodes.len(),
            })
        }
    }
}

/// Quadrature resolution sufficient for every mode of `obs` at scale `t`.
pub fn resolution_for(flow: &TorusMultiflow, obs: &TrigObservable, measure: &WeightMeasure, t: f64) -> usize {
    let max_xi = obs
        .modes()
        .iter()
        .map(|m| t * norm(&flow.frequency(&m.k)))
        .fold(0.0, f64::max);
    measure.suggested_resolution(max_xi)
}

/// `P_t f` as a trigonometric polynomial: each coefficient `c_k` becomes `c_k·ν̂(t·Aᵀk)`.
pub fn multiplier_oracle(
    flow: &TorusMultiflow,
    obs: &TrigObservable,
    measure: &WeightMeasure,
    t: f64,
) -> Result<TrigObservable> {
    check_compatible(flow, obs, measure, t)?;
    Ok(obs.map_coefficients(|k, c| {
        if k.iter().all(|v| *v == 0) {
            return c;
        }
        let xi: Vec<f64> = flow.frequency(k).iter().map(|w| t * w).collect();
        c * measure.fourier(&xi)
    }))
}

/// How the torus L¹ norm is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TorusGrid {
    pub lattice_points: usize,
    pub mc_samples: usize,
}

impl Default for TorusGrid {
    fn default() -> Self {
        TorusGrid {
            lattice_points: 65_521,
            mc_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Error {
    /// Closed form when `closed_form`, otherwise the lattice value.
    pub exact: f64,
    pub lattice: f64,
    pub mc: f64,
    pub mc_stderr: f64,
    /// `Σ_{k≠0} |c_k|·|ν̂(t·Aᵀk)|`.
    pub oracle_bound: f64,
    pub closed_form: bool,
    pub lattice_points: usize,
    pub mc_samples: usize,
}

/// `‖P_t f − ∫f dμ‖₁` on the torus.
pub fn l1_error(
    flow: &TorusMultiflow,
    obs: &TrigObservable,
    measure: &WeightMeasure,
    t: f64,
    grid: TorusGrid,
    seed: u64,
) -> Result<L1Error> {
    let g = multiplier_oracle(flow, obs, measure, t)?.centered();
    l1_norm(&g, grid, StreamKey::new(seed))
}

/// L¹ norm of a trigonometric polynomial under Haar measure.
///
/// Closed forms: no modes → 0; one mode → `|c|`; a conjugate pair
/// `a e_k + ā e_{−k}` = `2|a| cos(·)` → `4|a|/π`.
pub fn l1_norm(g: &TrigObservable, grid: TorusGrid, key: StreamKey) -> Result<L1Error> {
    if grid.lattice_points == 0 || grid.mc_samples < 2 {
        return config("torus grid needs lattice points and at least 2 Monte-Carlo samples");
    }
    let modes = g.modes();
    let oracle_bound: f64 = modes.iter().map(|m| m.c.norm()).sum();
    let closed = match modes {
        [] => Some(0.0),
        [m] => Some(m.c.norm()),
        [a, b] if a.k.iter().zip(&b.k).all(|(x, y)| *x == -*y)
            && (b.c - a.c.conj()).norm() <= 1e-14 * a.c.norm() =>
        {
            Some(4.0 * a.c.norm() / std::f64::consts::PI)
        }
        _ => None,
    };
    let dim = g.torus_dim();
    let lat = Rank1Lattice::new(grid.lattice_points, dim);
    let lattice = par_sum(lat.len(), 0.0, |i| g.evaluate(&lat.point(i)).norm()) / lat.len() as f64;
    let m = par_sum(grid.mc_samples, Moments::default(), |i| {
        let mut rng = key.rng(i as u64);
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        Moments::of(Complex64::new(g.evaluate(&x).norm(), 0.0))
    });
    Ok(L1Error {
        exact: closed.unwrap_or(lattice),
        lattice,
        mc: m.mean().re,
        mc_stderr: m.std_error(),
        oracle_bound,
        closed_form: closed.is_some(),
        lattice_points: grid.lattice_points,
        mc_samples: grid.mc_samples,
    })
}

/// A family of weights indexed by a growing parameter.
#[derive(Debug, Clone)]
pub enum MeasureFamily {
    /// One measure, averaged at scales `t` (`T_{t·r}`).
    Scaled { measure: WeightMeasure, times: Vec<f64> },
    /// Uniform measures on spheres of the given radii, averaged at `t = 1`.
    Spheres { center: Vec<f64>, radii: Vec<f64> },
}

impl MeasureFamily {
    pub fn schedule(&self) -> &[f64] {
        match self {
            MeasureFamily::Scaled { times, .. } => times,
            MeasureFamily::Spheres { radii, .. } => radii,
        }
    }

    fn dim(&self) -> usize {
        match self {
            MeasureFamily::Scaled { measure, .. } => measure.dim(),
            MeasureFamily::Spheres { center, .. } => center.len(),
        }
    }

    /// `(measure, t)` for schedule entry `i`.
    fn entry(&self, i: usize) -> Result<(WeightMeasure, f64)> {
        match self {
            MeasureFamily::Scaled { measure, times } => Ok((measure.clone(), times[i])),
            MeasureFamily::Spheres { center, radii } => {
                Ok((WeightMeasure::sphere(center.clone(), radii[i])?, 1.0))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MeasureFamily::Scaled { measure, .. } => format!("scaled {}", measure.describe()),
            MeasureFamily::Spheres { center, .. } => format!("spheres centered at {center:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub grid: TorusGrid,
    pub seed: u64,
    pub certificate_radius: u32,
    pub waive_ergodicity: bool,
}

impl SweepOptions {
    pub fn new(seed: u64) -> Self {
        SweepOptions {
            grid: TorusGrid::default(),
            seed,
            certificate_radius: DEFAULT_CERTIFICATE_RADIUS,
            waive_ergodicity: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepEntry {
    /// `t` for scaled families, the radius for sphere families.
    pub param: f64,
    pub l1_exact: f64,
    pub l1_lattice: f64,
    pub l1_mc: f64,
    pub l1_mc_stderr: f64,
    pub oracle_bound: f64,
    pub closed_form: bool,
    pub lattice_points: usize,
    pub mc_samples: usize,
    /// Seed of this entry's Monte-Carlo stream.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub param: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayStats {
    /// Last error over first error.
    pub last_first_ratio: Option<f64>,
    /// Largest error inside each dyadic window `[p₀2^j, p₀2^{j+1})`.
    pub envelope: Vec<EnvelopePoint>,
    /// Least-squares slope of ln(envelope) against ln(param).
    pub envelope_slope: Option<f64>,
}

impl DecayStats {
    pub fn from_entries(entries: &[SweepEntry]) -> Self {
        let last_first_ratio = match (entries.first(), entries.last()) {
            (Some(f), Some(l)) if f.l1_exact > 0.0 => Some(l.l1_exact / f.l1_exact),
            _ => None,
        };
        let envelope = dyadic_envelope(entries.iter().map(|e| (e.param, e.l1_exact)));
        let fit: Vec<(f64, f64)> = envelope
            .iter()
            .filter(|p| p.value > 0.0)
            .map(|p| (p.param.ln(), p.value.ln()))
            .collect();
        DecayStats {
            last_first_ratio,
            envelope_slope: least_squares_slope(&fit),
            envelope,
        }
    }
}

/// Window maxima of `(param, value)` pairs over dyadic windows anchored at the first param.
pub fn dyadic_envelope<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Vec<EnvelopePoint> {
    let mut windows: BTreeMap<i64, EnvelopePoint> = BTreeMap::new();
    let mut origin = None;
    for (p, v) in points {
        let p0 = *origin.get_or_insert(p);
        let j = (p / p0).log2().floor() as i64;
        let slot = windows.entry(j).or_insert(EnvelopePoint { param: p, value: v });
        if v > slot.value {
            *slot = EnvelopePoint { param: p, value: v };
        }
    }
    windows.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingReport {
    pub family: String,
    pub entries: Vec<SweepEntry>,
    pub decay: DecayStats,
    pub certificate: ErgodicityCertificate,
    /// The certificate failed and the run was explicitly waived.
    pub nonergodic: bool,
}

impl AveragingReport {
    pub fn label(&self) -> &'static str {
        if self.nonergodic {
            "NONERGODIC"
        } else {
            "ERGODIC"
        }
    }
}

pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.len() < 3 {
        return config("schedule needs at least 3 entries");
    }
    if schedule.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return config("schedule entries must be positive and finite");
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return config("schedule must be strictly increasing");
    }
    Ok(())
}

/// L¹ error of `P f` along a growing family of weights.
///
/// Refuses flows that fail the ergodicity certificate unless
/// `options.waive_ergodicity` is set; waived runs are marked `nonergodic`.
pub fn convergence_sweep(
    flow: &TorusMultiflow,
    obs: &TrigObservable,
    family: &MeasureFamily,
    options: SweepOptions,
) -> Result<AveragingReport> {
    let schedule = family.schedule();
    validate_schedule(schedule)?;
    if family.dim() != flow.time_dim() {
        return config(format!(
            "flow has {}-dimensional time but the family lives in ℝ^{}",
            flow.time_dim(),
            family.dim()
        ));
    }
    let certificate = flow.ergodicity_certificate(options.certificate_radius)?;
    if !certificate.passed() && !options.waive_ergodicity {
        return Err(Error::NotErgodic {
            offending: certificate.offending_k.clone().unwrap_or_default(),
        });
    }
    let entries = (0..schedule.len())
        .into_par_iter()
        .map(|i| {
            let (measure, t) = family.entry(i)?;
            let seed = derive_seed(options.seed, i as u64);
            let err = l1_error(flow, obs, &measure, t, options.grid, seed)?;
            Ok(SweepEntry {
                param: schedule[i],
                l1_exact: err.exact,
                l1_lattice: err.lattice,
                l1_mc: err.mc,
                l1_mc_stderr: err.mc_stderr,
                oracle_bound: err.oracle_bound,
                closed_form: err.closed_form,
                lattice_points: err.lattice_points,
                mc_samples: err.mc_samples,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AveragingReport {
        family: family.describe(),
        decay: DecayStats::from_entries(&entries),
        nonergodic: !certificate.passed(),
        certificate,
        entries,
    })
}

/// Largest coefficient difference between `P_t` applied `n` times with ν and
/// `P_t` applied once with `ν^{*n}`.
pub fn iterated_vs_convolution(
    flow: &TorusMultiflow,
    obs: &TrigObservable,
    measure: &WeightMeasure,
    t: f64,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return config("iteration count must be at least 1");
    }
    let mut iterated = obs.clone();
    for _ in 0..n {
        iterated = multiplier_oracle(flow, &iterated, measure, t)?;
    }
    let power = WeightMeasure::conv_power(measure.clone(), n)?;
    let once = multiplier_oracle(flow, obs, &power, t)?;
    Ok(iterated
        .modes()
        .iter()
        .zip(once.modes())
        .map(|(a, b)| (a.c - b.c).norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McCrossCheck {
    pub analytic_re: f64,
    pub analytic_im: f64,
    pub mc_re: f64,
    pub mc_im: f64,
    pub std_error: f64,
    /// `|mc − analytic| / std_error`.
    pub z: f64,
}

/// Sample `ν^{*n}` directly and compare `P_t f(x)` against `(P_t)^n f(x)` from the multiplier.
#[allow(clippy::too_many_arguments)]
pub fn iterated_mc_check(
    flow: &TorusMultiflow,
    obs: &TrigObservable,
    measure: &WeightMeasure,
    t: f64,
    n: usize,
    x: &[f64],
    count: usize,
    seed: u64,
) -> Result<McCrossCheck> {
    if n == 0 {
        return config("iteration count must be at least 1");
    }
    let mut iterated = obs.clone();
    for _ in 0..n {
        iterated = multiplier_oracle(flow, &iterated, measure, t)?;
    }
    let analytic = iterated.evaluate(x);
    let power = WeightMeasure::conv_power(measure.clone(), n)?;
    let est = average_pointwise(flow, obs, &power, t, x, AverageMode::MonteCarlo { count, seed })?;
    let se = est.std_error.unwrap_or(f64::INFINITY);
    Ok(McCrossCheck {
        analytic_re: analytic.re,
        analytic_im: analytic.im,
        mc_re: est.value.re,
        mc_im: est.value.im,
        std_error: se,
        z: (est.value - analytic).norm() / se,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiflow::Mode;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sqrt2_flow() -> TorusMultiflow {
        TorusMultiflow::new(vec![vec![1.0], vec![2f64.sqrt()]]).unwrap()
    }

    #[test]
    fn constant_observable_is_fixed() {
        let flow = TorusMultiflow::identity(2);
        let obs = TrigObservable::constant(2, c(1.5, -0.5));
        let m = WeightMeasure::moment_curve(2).unwrap();
        let q = average_pointwise(&flow, &obs, &m, 3.0, &[0.2, 0.9], AverageMode::Quadrature { resolution: 4 }).unwrap();
        assert!((q.value - c(1.5, -0.5)).norm() < 1e-14);
        let mc = average_pointwise(&flow, &obs, &m, 3.0, &[0.2, 0.9], AverageMode::MonteCarlo { count: 100, seed: 1 }).unwrap();
        assert!((mc.value - c(1.5, -0.5)).norm() < 1e-14);
        let err = l1_error(&flow, &obs, &m, 3.0, TorusGrid { lattice_points: 101, mc_samples: 100 }, 1).unwrap();
        assert_eq!(err.exact, 0.0);
    }

    #[test]
    fn single_mode_quadrature_matches_multiplier() {
        let flow = sqrt2_flow();
        let obs = TrigObservable::single(vec![2, -1], c(0.3, 0.8)).unwrap();
        let m = WeightMeasure::interval(0.0, 1.0).unwrap();
        let x = [0.17, 0.61];
        for t in [0.3, 2.0, 17.5] {
            let res = resolution_for(&flow, &obs, &m, t);
            let q = average_pointwise(&flow, &obs, &m, t, &x, AverageMode::Quadrature { resolution: res }).unwrap();
            let omega = 2.0 - 2f64.sqrt();
            let expected = obs.evaluate(&x) * m.fourier(&[t * omega]);
            assert!((q.value - expected).norm() < 1e-7);
        }
    }

    #[test]
    fn sphere_multiplier_example() {
        let flow = TorusMultiflow::identity(3);
        let obs = TrigObservable::single(vec![0, 1, 0], c(1.0, 0.0)).unwrap();
        let s = WeightMeasure::sphere(vec![0.0; 3], 1.0).unwrap();
        let p = multiplier_oracle(&flow, &obs, &s, 0.5).unwrap();
        assert!(p.modes()[0].c.norm() < 1e-15);
    }

    #[test]
    fn interval_annihilates_at_integers() {
        let flow = TorusMultiflow::identity(1);
        let obs = TrigObservable::new(
            1,
            vec![Mode { k: vec![0], c: c(2.0, 0.0) }, Mode { k: vec![1], c: c(1.0, 0.0) }],
            false,
        )
        .unwrap();
        let m = WeightMeasure::interval(0.0, 1.0).unwrap();
        for t in [1.0, 2.0, 7.0] {
            let p = multiplier_oracle(&flow, &obs, &m, t).unwrap();
            assert_eq!(p.modes()[0].c, c(2.0, 0.0));
            assert!(p.modes()[1].c.norm() < 1e-15);
        }
    }

    #[test]
    fn single_mode_l1_is_closed_form() {
        let flow = sqrt2_flow();
        let obs = TrigObservable::single(vec![1, 1], c(0.6, -0.8)).unwrap();
        let m = WeightMeasure::interval(0.0, 1.0).unwrap();
        let t = 1.3;
        let err = l1_error(&flow, &obs, &m, t, TorusGrid { lattice_points: 1009, mc_samples: 1000 }, 5).unwrap();
        let w = PI * t * (1.0 + 2f64.sqrt());
        assert!((err.exact - (w.sin() / w).abs()).abs() < 1e-14);
        assert!(err.closed_form);
        assert!((err.lattice - err.exact).abs() < 1e-12);
    }

    #[test]
    fn conjugate_pair_l1() {
        let obs = TrigObservable::new(
            2,
            vec![Mode { k: vec![1, 2], c: c(0.3, 0.4) }, Mode { k: vec![-1, -2], c: c(0.3, -0.4) }],
            true,
        )
        .unwrap();
        let err = l1_norm(&obs, TorusGrid { lattice_points: 65_521, mc_samples: 1000 }, StreamKey::new(1)).unwrap();
        assert!(err.closed_form);
        assert!((err.exact - 2.0 / PI).abs() < 1e-15);
        assert!((err.lattice - err.exact).abs() < 1e-6);
    }

    #[test]
    fn multi_mode_lattice_and_mc_agree() {
        let flow = TorusMultiflow::identity(2);
        let obs = TrigObservable::new(
            2,
            vec![
                Mode { k: vec![1, 0], c: c(1.0, 0.0) },
                Mode { k: vec![0, 1], c: c(0.0, 0.5) },
                Mode { k: vec![1, -1], c: c(-0.3, 0.2) },
            ],
            false,
        )
        .unwrap();
        let m = WeightMeasure::moment_curve(2).unwrap();
        let err = l1_error(&flow, &obs, &m, 0.7, TorusGrid { lattice_points: 65_521, mc_samples: 20_000 }, 9).unwrap();
        assert!(!err.closed_form);
        assert!((err.lattice - err.mc).abs() < 4.0 * err.mc_stderr);
        assert!(err.lattice <= err.oracle_bound + 1e-10);
        assert!(err.mc <= err.oracle_bound + 1e-10);
    }

    #[test]
    fn iterated_identity() {
        let flow = TorusMultiflow::identity(2);
        let obs = TrigObservable::new(
            2,
            vec![Mode { k: vec![1, 0], c: c(1.0, 0.0) }, Mode { k: vec![1, 1], c: c(0.2, 0.7) }],
            false,
        )
        .unwrap();
        let m = WeightMeasure::moment_curve(2).unwrap();
        assert_eq!(iterated_vs_convolution(&flow, &obs, &m, 1.7, 1).unwrap(), 0.0);
        for n in [2, 3] {
            assert!(iterated_vs_convolution(&flow, &obs, &m, 1.7, n).unwrap() <= 1e-12);
        }
        assert!(iterated_vs_convolution(&flow, &obs, &m, 1.7, 0).is_err());
    }

    #[test]
    fn sweep_refuses_nonergodic_without_waiver() {
        let flow = TorusMultiflow::new(vec![vec![1.0], vec![1.0]]).unwrap();
        let obs = TrigObservable::single(vec![1, -1], c(0.7, 0.0)).unwrap();
        let fam = MeasureFamily::Scaled {
            measure: WeightMeasure::interval(0.0, 1.0).unwrap(),
            times: vec![1.0, 10.0, 100.0],
        };
        let mut opts = SweepOptions::new(3);
        opts.grid = TorusGrid { lattice_points: 101, mc_samples: 100 };
        assert!(matches!(
            convergence_sweep(&flow, &obs, &fam, opts),
            Err(Error::NotErgodic { .. })
        ));
        opts.waive_ergodicity = true;
        let rep = convergence_sweep(&flow, &obs, &fam, opts).unwrap();
        assert!(rep.nonergodic);
        for e in &rep.entries {
            assert!((e.l1_exact - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(validate_schedule(&[1.0, 2.0]).is_err());
        assert!(validate_schedule(&[1.0, 2.0, 2.0]).is_err());
        assert!(validate_schedule(&[0.0, 1.0, 2.0]).is_err());
        assert!(validate_schedule(&[1.0, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn envelope_windows() {
        let pts = [(1.0, 0.5), (1.5, 0.9), (2.0, 0.3), (3.9, 0.4), (4.0, 0.1)];
        let env = dyadic_envelope(pts);
        assert_eq!(env.len(), 3);
        assert_eq!(env[0], EnvelopePoint { param: 1.5, value: 0.9 });
        assert_eq!(env[1], EnvelopePoint { param: 3.9, value: 0.4 });
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let flow = TorusMultiflow::identity(2);
        let obs = TrigObservable::single(vec![1, 0], c(1.0, 0.0)).unwrap();
        let m = WeightMeasure::moment_curve(3).unwrap();
        assert!(matches!(
            average_pointwise(&flow, &obs, &m, 1.0, &[0.0, 0.0], AverageMode::Quadrature { resolution: 4 }),
            Err(Error::Config(_))
        ));
        let p = WeightMeasure::conv_power(WeightMeasure::moment_curve(2).unwrap(), 2).unwrap();
        assert!(matches!(
            average_pointwise(&flow, &obs, &p, 1.0, &[0.0, 0.0], AverageMode::Quadrature { resolution: 4 }),
            Err(Error::Unsupported(_))
        ));
    }
}
