//! Experiment configuration: a TOML file with typed sections, optionally
//! layered over a named preset, resolved into core objects.

use std::path::Path;

use ergavg_core::averaging::{MeasureFamily, TorusGrid};
use ergavg_core::convolution::ColatitudeLaw;
use ergavg_core::measures::{BoxRegion, SphereMeasure, WeightMeasure};
use ergavg_core::multiflow::{Mode, TorusMultiflow, TrigObservable, DEFAULT_CERTIFICATE_RADIUS, DEFAULT_SCAN_BUDGET};
use ergavg_core::presets::{five_mode_observable, geometric_schedule, linear_schedule, prime_root_matrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn bad<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterate: Option<IterateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disintegration: Option<DisintegrationSpec>,
    #[serde(default, skip_serializing_if = "BudgetSpec::is_empty")]
    pub budget: BudgetSpec,
    #[serde(skip_serializing)]
    pub output: Option<OutputSpec>,
}

/// Exactly one of `matrix`, `identity`, `prime_roots`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    /// Rows of A: torus_dim rows of time_dim entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    /// A = I on the d-torus.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<usize>,
    /// Square roots of distinct primes, (time_dim + 1) × time_dim.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prime_roots: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    Interval,
    Box,
    MomentCurve,
    Sphere,
    Semimeridian,
    Line,
    PointMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub longitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// Convolution power; 1 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<usize>,
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind) -> Self {
        MeasureSpec {
            kind,
            lo: None,
            hi: None,
            dim: None,
            center: None,
            radius: None,
            longitude: None,
            direction: None,
            point: None,
            power: None,
        }
    }

    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, set) in [
            ("lo", self.lo.is_some()),
            ("hi", self.hi.is_some()),
            ("dim", self.dim.is_some()),
            ("center", self.center.is_some()),
            ("radius", self.radius.is_some()),
            ("longitude", self.longitude.is_some()),
            ("direction", self.direction.is_some()),
            ("point", self.point.is_some()),
        ] {
            if set {
                out.push(name);
            }
        }
        out
    }

    fn allow_only(&self, allowed: &[&str]) -> CliResult<()> {
        for field in self.present() {
            if !allowed.contains(&field) {
                return bad(format!("measure kind {:?} does not take `{field}`", self.kind));
            }
        }
        Ok(())
    }

    fn need<T: Clone>(v: &Option<T>, name: &str) -> CliResult<T> {
        v.clone().ok_or_else(|| CliError::Config(format!("measure needs `{name}`")))
    }

    /// The base measure, without the convolution power.
    pub fn base(&self) -> CliResult<WeightMeasure> {
        use MeasureKind::*;
        let m = match self.kind {
            Interval => {
                self.allow_only(&["lo", "hi"])?;
                let (lo, hi) = (Self::need(&self.lo, "lo")?, Self::need(&self.hi, "hi")?);
                if lo.len() != 1 || hi.len() != 1 {
                    return bad("interval bounds are one-element lists");
                }
                WeightMeasure::interval(lo[0], hi[0])?
            }
            Box => {
                self.allow_only(&["lo", "hi"])?;
                WeightMeasure::uniform_box(BoxRegion::new(Self::need(&self.lo, "lo")?, Self::need(&self.hi, "hi")?)?)?
            }
            MomentCurve => {
                self.allow_only(&["dim"])?;
                WeightMeasure::moment_curve(Self::need(&self.dim, "dim")?)?
            }
            Sphere => {
                self.allow_only(&["center", "radius"])?;
                WeightMeasure::sphere(Self::need(&self.center, "center")?, Self::need(&self.radius, "radius")?)?
            }
            Semimeridian => {
                self.allow_only(&["center", "radius", "longitude"])?;
                let sphere = SphereMeasure::new(Self::need(&self.center, "center")?, Self::need(&self.radius, "radius")?)?;
                WeightMeasure::semimeridian(Self::need(&self.longitude, "longitude")?, &sphere)?
            }
            Line => {
                self.allow_only(&["direction"])?;
                WeightMeasure::line(Self::need(&self.direction, "direction")?)?
            }
            PointMass => {
                self.allow_only(&["point"])?;
                WeightMeasure::point_mass(Self::need(&self.point, "point")?)?
            }
        };
        Ok(m)
    }

    pub fn build(&self) -> CliResult<WeightMeasure> {
        let base = self.base()?;
        match self.power.unwrap_or(1) {
            1 => Ok(base),
            n => Ok(WeightMeasure::conv_power(base, n)?),
        }
    }

    /// The sphere behind a `sphere` measure, for the geometry commands.
    pub fn sphere(&self) -> CliResult<SphereMeasure> {
        if self.kind != MeasureKind::Sphere || self.power.unwrap_or(1) != 1 {
            return bad("this command needs a plain `sphere` measure");
        }
        match self.base()? {
            WeightMeasure::Sphere(s) => Ok(s),
            _ => unreachable!("sphere kind builds a sphere"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// Exactly one of `modes`, `preset`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeSpec>>,
    /// `five-mode`: five fixed nonzero modes on the flow's torus.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// One measure averaged at the scheduled times t.
    Scaled,
    /// Spheres with the scheduled radii (the measure gives the center), t = 1.
    Radii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Either explicit `values` or `spacing` with `start`, `stop`, `count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub family: FamilyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl ScheduleSpec {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        match (&self.values, self.spacing) {
            (Some(v), None) if self.start.is_none() && self.stop.is_none() && self.count.is_none() => Ok(v.clone()),
            (None, Some(spacing)) => {
                let (Some(start), Some(stop), Some(count)) = (self.start, self.stop, self.count) else {
                    return bad("spaced schedules need `start`, `stop` and `count`");
                };
                Ok(match spacing {
                    Spacing::Linear => linear_schedule(start, stop, count)?,
                    Spacing::Geometric => geometric_schedule(start, stop, count)?,
                })
            }
            _ => bad("schedule takes either `values` or `spacing` with `start`, `stop`, `count`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateSpec {
    pub t: Vec<f64>,
    pub n: usize,
    /// Torus point for the Monte-Carlo cross-check.
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Colatitude {
    SineHalf,
    Uniform,
}

impl From<Colatitude> for ColatitudeLaw {
    fn from(c: Colatitude) -> Self {
        match c {
            Colatitude::SineHalf => ColatitudeLaw::SineHalf,
            Colatitude::Uniform => ColatitudeLaw::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisintegrationSpec {
    pub colatitude: Colatitude,
}

/// Work budgets. Missing entries take per-command defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_radius: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl BudgetSpec {
    fn is_empty(&self) -> bool {
        *self == BudgetSpec::default()
    }

    /// Entries of `over` win.
    pub fn overlay(self, over: BudgetSpec) -> BudgetSpec {
        BudgetSpec {
            mc_samples: over.mc_samples.or(self.mc_samples),
            lattice_points: over.lattice_points.or(self.lattice_points),
            certificate_radius: over.certificate_radius.or(self.certificate_radius),
            scan_budget: over.scan_budget.or(self.scan_budget),
            trials: over.trials.or(self.trials),
            samples: over.samples.or(self.samples),
            cells: over.cells.or(self.cells),
            threshold: over.threshold.or(self.threshold),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        let d = TorusGrid::default();
        TorusGrid {
            lattice_points: self.lattice_points.unwrap_or(d.lattice_points),
            mc_samples: self.mc_samples.unwrap_or(d.mc_samples),
        }
    }

    pub fn certificate_radius(&self) -> u32 {
        self.certificate_radius.unwrap_or(DEFAULT_CERTIFICATE_RADIUS)
    }

    pub fn scan_budget(&self) -> u64 {
        self.scan_budget.unwrap_or(DEFAULT_SCAN_BUDGET)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize configuration: {e}")))
    }

    /// Sections present in `over` replace whole sections; budget entries merge one by one.
    pub fn overlay(self, over: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            preset: over.preset.or(self.preset),
            seed: over.seed.or(self.seed),
            flow: over.flow.or(self.flow),
            measure: over.measure.or(self.measure),
            observable: over.observable.or(self.observable),
            schedule: over.schedule.or(self.schedule),
            iterate: over.iterate.or(self.iterate),
            disintegration: over.disintegration.or(self.disintegration),
            budget: self.budget.overlay(over.budget),
            output: over.output.or(self.output),
        }
    }

    pub fn seed(&self) -> CliResult<u64> {
        match self.seed {
            None => bad("a seed is required (set `seed` in the configuration or pass --seed)"),
            Some(s) if s > i64::MAX as u64 => bad("seed must fit in a signed 64-bit integer"),
            Some(s) => Ok(s),
        }
    }

    fn section<'a, T>(v: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        v.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }

    pub fn flow(&self) -> CliResult<TorusMultiflow> {
        Ok(TorusMultiflow::new(self.flow_matrix()?)?)
    }

    fn flow_matrix(&self) -> CliResult<Vec<Vec<f64>>> {
        let f = Self::section(&self.flow, "flow")?;
        match (&f.matrix, f.identity, f.prime_roots) {
            (Some(m), None, None) => Ok(m.clone()),
            (None, Some(d), None) => {
                if d == 0 {
                    return bad("identity flow needs a positive dimension");
                }
                Ok((0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
            }
            (None, None, Some(d)) => {
                if d == 0 {
                    return bad("prime-root flow needs a positive time dimension");
                }
                Ok(prime_root_matrix(d + 1, d)?)
            }
            _ => bad("[flow] takes exactly one of `matrix`, `identity`, `prime_roots`"),
        }
    }

    pub fn measure(&self) -> CliResult<&MeasureSpec> {
        Self::section(&self.measure, "measure")
    }

    pub fn observable(&self, torus_dim: usize) -> CliResult<TrigObservable> {
        Ok(TrigObservable::new(torus_dim, self.observable_modes(torus_dim)?, false)?)
    }

    fn observable_modes(&self, torus_dim: usize) -> CliResult<Vec<Mode>> {
        let o = Self::section(&self.observable, "observable")?;
        match (&o.modes, o.preset.as_deref()) {
            (Some(modes), None) => Ok(modes
                .iter()
                .map(|m| Mode { k: m.k.clone(), c: Complex64::new(m.re, m.im) })
                .collect()),
            (None, Some("five-mode")) => Ok(five_mode_observable(torus_dim)?.modes().to_vec()),
            (None, Some(other)) => bad(format!("unknown observable preset `{other}`")),
            _ => bad("[observable] takes exactly one of `modes`, `preset`"),
        }
    }

    pub fn family(&self) -> CliResult<MeasureFamily> {
        let s = Self::section(&self.schedule, "schedule")?;
        let points = s.points()?;
        let m = self.measure()?;
        match s.family {
            FamilyKind::Scaled => Ok(MeasureFamily::Scaled { measure: m.build()?, times: points }),
            FamilyKind::Radii => {
                if m.kind != MeasureKind::Sphere || m.radius.is_some() || m.power.unwrap_or(1) != 1 {
                    return bad("radius schedules need a `sphere` measure with a center and no radius");
                }
                let center = MeasureSpec::need(&m.center, "center")?;
                Ok(MeasureFamily::Spheres { center, radii: points })
            }
        }
    }

    pub fn iterate(&self) -> CliResult<&IterateSpec> {
        Self::section(&self.iterate, "iterate")
    }

    pub fn colatitude(&self) -> CliResult<Colatitude> {
        Ok(Self::section(&self.disintegration, "disintegration")?.colatitude)
    }

    /// Replace shorthand with explicit values so the echo stands on its own.
    pub fn resolved(&self) -> CliResult<ExperimentConfig> {
        let mut out = self.clone();
        if self.flow.is_some() {
            let matrix = self.flow_matrix()?;
            let torus_dim = matrix.len();
            out.flow = Some(FlowSpec { matrix: Some(matrix), ..FlowSpec::default() });
            if self.observable.is_some() {
                let modes = self
                    .observable_modes(torus_dim)?
                    .into_iter()
                    .map(|m| ModeSpec { k: m.k, re: m.c.re, im: m.c.im })
                    .collect();
                out.observable = Some(ObservableSpec { modes: Some(modes), preset: None });
            }
        }
        out.output = None;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7

[flow]
matrix = [[1.0], [1.4142135623730951]]

[measure]
kind = "interval"
lo = [0.0]
hi = [1.0]

[observable]
modes = [{ k = [1, 0], re = 1.0, im = 0.0 }, { k = [0, 1], re = 0.0, im = -0.5 }]

[schedule]
family = "scaled"
spacing = "geometric"
start = 1.0
stop = 100.0
count = 5

[budget]
mc_samples = 1000
"#;

    #[test]
    fn parses_and_builds() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.seed().unwrap(), 7);
        let flow = c.flow().unwrap();
        assert_eq!((flow.torus_dim(), flow.time_dim()), (2, 1));
        assert_eq!(c.observable(2).unwrap().modes().len(), 2);
        let fam = c.family().unwrap();
        assert_eq!(fam.schedule().len(), 5);
        assert_eq!(c.budget.grid().mc_samples, 1000);
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap().resolved().unwrap();
        let text = c.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn rejects_unknown_and_conflicting_fields() {
        assert!(ExperimentConfig::from_toml("seed = 1\nfoo = 2").is_err());
        let c = ExperimentConfig::from_toml("[flow]\nidentity = 2\nprime_roots = 1").unwrap();
        assert!(c.flow().is_err());
        let c = ExperimentConfig::from_toml("[measure]\nkind = \"sphere\"\ncenter = [0.0]\nradius = 1.0\ndim = 3").unwrap();
        assert!(c.measure().unwrap().build().is_err());
        assert!(ExperimentConfig::default().seed().is_err());
    }

    #[test]
    fn overlay_replaces_sections_and_merges_budgets() {
        let base = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let over = ExperimentConfig::from_toml("seed = 9\n[budget]\nlattice_points = 101").unwrap();
        let c = base.overlay(over);
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.budget.mc_samples, Some(1000));
        assert_eq!(c.budget.lattice_points, Some(101));
    }
}
