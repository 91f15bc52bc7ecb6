//! Shipped experiments. Each preset is a configuration without a seed plus
//! the analytic fact that backs its expected numbers.

use crate::config::{
    BudgetSpec, Colatitude, DisintegrationSpec, ExperimentConfig, FamilyKind, FlowSpec, IterateSpec, MeasureKind,
    MeasureSpec, ModeSpec, ObservableSpec, ScheduleSpec, Spacing,
};
use crate::Command;

pub struct Preset {
    pub name: &'static str,
    pub command: Command,
    pub justification: &'static str,
    pub config: fn() -> ExperimentConfig,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "theorem1-interval",
        command: Command::RunSweep,
        justification: "Uniform weight on [0,1] has transform e^{πiξ}·sin(πξ)/(πξ); each mode's error is \
            |c_k|·|sinc(π t ω_k)| with ω_k = Aᵀk ≠ 0, so the L1 error tends to 0 (Riemann–Lebesgue). \
            A holds square roots of distinct primes, which are linearly independent over the rationals, \
            so Aᵀk ≠ 0 for every k ≠ 0.",
        config: interval_sweep,
    },
    Preset {
        name: "theorem1-moment-curve",
        command: Command::RunSweep,
        justification: "Uniform weight on the moment curve (r, r²), r ∈ (0,1); its transform is evaluated by \
            adaptive quadrature and decays along every ray because the curve has nonvanishing curvature. \
            The decay rate is measured, not asserted. Flow entries are square roots of distinct primes (ergodic).",
        config: moment_curve_sweep,
    },
    Preset {
        name: "theorem5-spheres",
        command: Command::RunSweep,
        justification: "Unit-normalized surface measure on the sphere of radius R in R³ has transform \
            sin(2πR|ξ|)/(2πR|ξ|). With A = I and the single mode k = (1,0,0), the error is \
            |sin(2πR)/(2πR)| exactly, with envelope 1/(2πR).",
        config: sphere_radii_sweep,
    },
    Preset {
        name: "nonergodic-control",
        command: Command::RunSweep,
        justification: "A = (1,1)ᵀ and k = (1,−1) give Aᵀk = 0, so the multiplier is the transform at 0, \
            which is 1: the error equals |c_k| = 1 for every t. Refused unless --waive-ergodicity is given.",
        config: nonergodic_control,
    },
    Preset {
        name: "irrational-pair",
        command: Command::CheckErgodicity,
        justification: "A = (1,√2)ᵀ: k₁ + √2·k₂ = 0 forces k = 0 because √2 is irrational; \
            the certificate must pass at every radius.",
        config: irrational_pair,
    },
    Preset {
        name: "resonant-pair",
        command: Command::CheckErgodicity,
        justification: "A = (1,1)ᵀ: k = (1,−1) gives Aᵀk = 0 exactly; the certificate must fail with that offender.",
        config: resonant_pair,
    },
    Preset {
        name: "moment-curve-d4",
        command: Command::CheckGeneralPosition,
        justification: "Tangents of (r, r², r³, r⁴) at r₁..r₄ form a matrix with determinant \
            4!·∏_{i<j}(r_j − r_i), nonzero for distinct parameters.",
        config: moment_curve_d4,
    },
    Preset {
        name: "line-control",
        command: Command::CheckGeneralPosition,
        justification: "A straight line r ↦ (r, r) has parallel tangents; every determinant is 0.",
        config: line_control,
    },
    Preset {
        name: "moment-curve-conv-d",
        command: Command::ConvDensity,
        justification: "For the moment curve in R^d the d-fold self-convolution is absolutely continuous \
            because tangents at distinct points are linearly independent (Vandermonde). Here d = 2.",
        config: moment_curve_conv,
    },
    Preset {
        name: "sphere-conv-2",
        command: Command::ConvDensity,
        justification: "The self-convolution of the unit sphere measure in R³ is absolutely continuous: the sum \
            map from (meridian point, sphere point) has nonzero Jacobian almost everywhere.",
        config: sphere_conv,
    },
    Preset {
        name: "point-mass-control",
        command: Command::ConvDensity,
        justification: "The threefold self-convolution of a point mass at a is the point mass at 3a: \
            one cell carries all the mass and must be flagged as an atom.",
        config: point_mass_control,
    },
    Preset {
        name: "sphere-jacobian",
        command: Command::JacobianScan,
        justification: "The sum-map Jacobian is R³·sin φ·(m′·p̂), which vanishes only on a null set; \
            random configurations fall below 1e-6 with negligible frequency.",
        config: sphere_jacobian,
    },
    Preset {
        name: "sphere-disintegration",
        command: Command::DisintegrationTest,
        justification: "Uniform sphere measure = uniform longitude × colatitude density sin(θ)/2 along the \
            semimeridian; both samplers draw from the same law.",
        config: || disintegration(Colatitude::SineHalf),
    },
    Preset {
        name: "uniform-colatitude-control",
        command: Command::DisintegrationTest,
        justification: "Uniform colatitude overweights the poles relative to sin(θ)/2; the KS test must reject.",
        config: || disintegration(Colatitude::Uniform),
    },
    Preset {
        name: "moment-curve-iterate",
        command: Command::IterateCheck,
        justification: "Applying the averaging operator n times multiplies each coefficient by the transform to \
            the n-th power, which is the transform of the n-fold convolution power.",
        config: moment_curve_iterate,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn sphere_spec(radius: Option<f64>) -> MeasureSpec {
    MeasureSpec { center: Some(vec![0.0; 3]), radius, ..MeasureSpec::new(MeasureKind::Sphere) }
}

fn five_mode() -> Option<ObservableSpec> {
    Some(ObservableSpec { modes: None, preset: Some("five-mode".into()) })
}

fn geometric_times(start: f64, stop: f64, count: usize) -> Option<ScheduleSpec> {
    Some(ScheduleSpec {
        family: FamilyKind::Scaled,
        values: None,
        spacing: Some(Spacing::Geometric),
        start: Some(start),
        stop: Some(stop),
        count: Some(count),
    })
}

fn interval_sweep() -> ExperimentConfig {
    ExperimentConfig {
        flow: Some(FlowSpec { prime_roots: Some(1), ..FlowSpec::default() }),
        measure: Some(MeasureSpec { lo: Some(vec![0.0]), hi: Some(vec![1.0]), ..MeasureSpec::new(MeasureKind::Interval) }),
        observable: five_mode(),
        schedule: geometric_times(1.0, 1000.0, 31),
        ..ExperimentConfig::default()
    }
}

fn moment_curve_sweep() -> ExperimentConfig {
    ExperimentConfig {
        flow: Some(FlowSpec { prime_roots: Some(2), ..FlowSpec::default() }),
        measure: Some(MeasureSpec { dim: Some(2), ..MeasureSpec::new(MeasureKind::MomentCurve) }),
        observable: five_mode(),
        schedule: geometric_times(1.0, 1000.0, 31),
        ..ExperimentConfig::default()
    }
}

fn sphere_radii_sweep() -> ExperimentConfig {
    ExperimentConfig {
        flow: Some(FlowSpec { identity: Some(3), ..FlowSpec::default() }),
        measure: Some(sphere_spec(None)),
        observable: Some(ObservableSpec {
            modes: Some(vec![ModeSpec { k: vec![1, 0, 0], re: 1.0, im: 0.0 }]),
            preset: None,
        }),
        // Integer radii sit on zeros of sin(2πR); a fine grid traces the envelope.
        schedule: Some(ScheduleSpec {
            family: FamilyKind::Radii,
            values: None,
            spacing: Some(Spacing::Linear),
            start: Some(1.0),
            stop: Some(100.0),
            count: Some(1981),
        }),
        ..ExperimentConfig::default()
    }
}

fn resonant_flow() -> Option<FlowSpec> {
    Some(FlowSpec { matrix: Some(vec![vec![1.0], vec![1.0]]), ..FlowSpec::default() })
}

fn nonergodic_control() -> ExperimentConfig {
    ExperimentConfig {
        flow: resonant_flow(),
        measure: Some(MeasureSpec { lo: Some(vec![0.0]), hi: Some(vec![1.0]), ..MeasureSpec::new(MeasureKind::Interval) }),
        observable: Some(ObservableSpec {
            modes: Some(vec![ModeSpec { k: vec![1, -1], re: 0.6, im: -0.8 }]),
            preset: None,
        }),
        schedule: geometric_times(1.0, 1000.0, 31),
        ..ExperimentConfig::default()
    }
}

fn irrational_pair() -> ExperimentConfig {
    ExperimentConfig {
        flow: Some(FlowSpec { matrix: Some(vec![vec![1.0], vec![2f64.sqrt()]]), ..FlowSpec::default() }),
        budget: BudgetSpec { certificate_radius: Some(50), ..BudgetSpec::default() },
        ..ExperimentConfig::default()
    }
}

fn resonant_pair() -> ExperimentConfig {
    ExperimentConfig {
        flow: resonant_flow(),
        budget: BudgetSpec { certificate_radius: Some(2), ..BudgetSpec::default() },
        ..ExperimentConfig::default()
    }
}

fn moment_curve_d4() -> ExperimentConfig {
    ExperimentConfig {
        measure: Some(MeasureSpec { dim: Some(4), ..MeasureSpec::new(MeasureKind::MomentCurve) }),
        budget: BudgetSpec { trials: Some(1000), threshold: Some(1e-12), ..BudgetSpec::default() },
        ..ExperimentConfig::default()
    }
}

fn line_control() -> ExperimentConfig {
    ExperimentConfig {
        measure: Some(MeasureSpec { direction: Some(vec![1.0, 1.0]), ..MeasureSpec::new(MeasureKind::Line) }),
        budget: BudgetSpec { trials: Some(1000), threshold: Some(1e-12), ..BudgetSpec::default() },
        ..ExperimentConfig::default()
    }
}

fn conv_budget(samples: usize) -> BudgetSpec {
    BudgetSpec { samples: Some(samples), cells: Some(30), ..BudgetSpec::default() }
}

fn moment_curve_conv() -> ExperimentConfig {
    ExperimentConfig {
        measure: Some(MeasureSpec { dim: Some(2), power: Some(2), ..MeasureSpec::new(MeasureKind::MomentCurve) }),
        budget: conv_budget(1_000_000),
        ..ExperimentConfig::default()
    }
}

fn sphere_conv() -> ExperimentConfig {
    ExperimentConfig {
        measure: Some(MeasureSpec { power: Some(2), ..sphere_spec(Some(1.0)) }),
        budget: conv_budget(1_000_000),
        ..ExperimentConfig::default()
    }
}

fn point_mass_control() -> ExperimentConfig {
    ExperimentConfig {
        measure: Some(MeasureSpec {
            point: Some(vec![0.3, -0.7]),
            power: Some(3),
            ..MeasureSpec::new(MeasureKind::PointMass)
        }),
        budget: conv_budget(20_000),
        ..ExperimentConfig::default()
    }
}

fn sphere_jacobian() -> ExperimentConfig {
    ExperimentConfig {
        measure: Some(sphere_spec(Some(1.0))),
        budget: BudgetSpec { trials: Some(100_000), threshold: Some(1e-6), ..BudgetSpec::default() },
        ..ExperimentConfig::default()
    }
}

fn disintegration(colatitude: Colatitude) -> ExperimentConfig {
    ExperimentConfig {
        measure: Some(sphere_spec(Some(1.0))),
        disintegration: Some(DisintegrationSpec { colatitude }),
        budget: BudgetSpec { samples: Some(100_000), ..BudgetSpec::default() },
        ..ExperimentConfig::default()
    }
}

fn moment_curve_iterate() -> ExperimentConfig {
    ExperimentConfig {
        flow: Some(FlowSpec { identity: Some(2), ..FlowSpec::default() }),
        measure: Some(MeasureSpec { dim: Some(2), ..MeasureSpec::new(MeasureKind::MomentCurve) }),
        observable: five_mode(),
        iterate: Some(IterateSpec { t: vec![0.5, 1.0, 2.0, 5.0], n: 2, x: vec![0.1, 0.2] }),
        budget: BudgetSpec { mc_samples: Some(100_000), ..BudgetSpec::default() },
        ..ExperimentConfig::default()
    }
}
