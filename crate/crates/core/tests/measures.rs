use std::f64::consts::PI;
use std::sync::Arc;

use ergavg_core::measures::{AcDensity, BoxRegion, SamplerSpec, WeightMeasure};
use ergavg_core::stats::{ks_critical_one_sample, ks_one_sample};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn variants() -> Vec<WeightMeasure> {
    let tri = AcDensity::custom(
        "2x",
        BoxRegion::unit(1),
        Arc::new(|x: &[f64]| 2.0 * x[0]),
        SamplerSpec::Rejection { bound: 2.0 },
    )
    .unwrap();
    vec![
        WeightMeasure::interval(-0.5, 1.5).unwrap(),
        WeightMeasure::uniform_box(BoxRegion::unit(2)).unwrap(),
        WeightMeasure::AcDensity(tri),
        WeightMeasure::moment_curve(2).unwrap(),
        WeightMeasure::moment_curve(3).unwrap(),
        WeightMeasure::semimeridian(1.1, &ergavg_core::measures::SphereMeasure::unit(3)).unwrap(),
        WeightMeasure::sphere(vec![0.0; 3], 1.0).unwrap(),
        WeightMeasure::sphere(vec![0.5, -0.5], 2.0).unwrap(),
        WeightMeasure::sphere(vec![0.0; 4], 1.0).unwrap(),
    ]
}

#[test]
fn moment_curve_first_coordinate_is_uniform() {
    let m = WeightMeasure::moment_curve(2).unwrap();
    let s = m.sample(2024, 100_000).unwrap();
    let first: Vec<f64> = s.iter().map(|p| p[0]).collect();
    let d = ks_one_sample(&first, |x| x.clamp(0.0, 1.0));
    assert!(d < ks_critical_one_sample(first.len(), 0.01), "KS {d}");
}

#[test]
fn moment_curve_in_one_dimension_is_uniform_interval() {
    let m = WeightMeasure::moment_curve(1).unwrap();
    let u = WeightMeasure::interval(0.0, 1.0).unwrap();
    for xi in [0.3, 1.0, 2.7] {
        assert!((m.fourier(&[xi]) - u.fourier(&[xi])).norm() < 1e-9);
    }
    let s: Vec<f64> = m.sample(1, 50_000).unwrap().iter().map(|p| p[0]).collect();
    assert!(ks_one_sample(&s, |x| x.clamp(0.0, 1.0)) < ks_critical_one_sample(s.len(), 0.01));
}

#[test]
fn every_variant_is_normalized() {
    for m in variants() {
        let q = m.integrate(|_| 1.0, 4).unwrap();
        assert!((q - 1.0).abs() < 1e-9, "{m:?}: {q}");
    }
}

#[test]
fn semimeridian_examples() {
    let s = ergavg_core::measures::SphereMeasure::unit(3);
    let m = WeightMeasure::semimeridian(0.0, &s).unwrap();
    let WeightMeasure::Curve(c) = &m else { unreachable!() };
    let eq = c.curve().point(PI / 2.0);
    assert!((eq[0] - 1.0).abs() < 1e-15 && eq[1].abs() < 1e-15 && eq[2].abs() < 1e-15);
    assert_eq!(c.curve().point(0.0), vec![0.0, 0.0, 1.0]);
    assert!((m.integrate(|_| 1.0, 3).unwrap() - 1.0).abs() < 1e-12);
    assert!((c.weight_at(1.0) - 1.0 / PI).abs() < 1e-16);
}

/// Closed forms against forced quadrature at 100 random frequencies.
#[test]
fn closed_form_and_quadrature_transforms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let interval = WeightMeasure::interval(-0.3, 0.9).unwrap();
    let sphere = WeightMeasure::sphere(vec![0.2, -0.1, 0.4], 1.3).unwrap();
    for _ in 0..100 {
        let xi1 = [rng.random_range(-10.0..10.0)];
        let a = interval.fourier(&xi1);
        let b = interval.fourier_by_quadrature(&xi1, 1e-10).unwrap();
        assert!((a - b.value).norm() < 1e-6);

        let mut xi3: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = rng.random_range(0.0..6.0) / xi3.iter().map(|v| v * v).sum::<f64>().sqrt();
        xi3.iter_mut().for_each(|v| *v *= r);
        let a = sphere.fourier(&xi3);
        let b = sphere.fourier_by_quadrature(&xi3, 1e-10).unwrap();
        assert!(b.converged);
        assert!((a - b.value).norm() < 1e-6, "{a} vs {}", b.value);
    }
}

#[test]
fn sample_means_agree_with_quadrature() {
    let g = |x: &[f64]| {
        let s: f64 = x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum();
        s.cos() + x[0] * x[0]
    };
    for (i, m) in variants().into_iter().enumerate() {
        let n = 40_000;
        let vals: Vec<f64> = m.sample(100 + i as u64, n).unwrap().iter().map(|x| g(x)).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let q = m.integrate(g, 6).unwrap();
        assert!((mean - q).abs() <= 4.0 * se, "{m:?}: {mean} vs {q} (se {se})");
    }
}

#[test]
fn conv_power_empirical_characteristic_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bases = [
        WeightMeasure::moment_curve(2).unwrap(),
        WeightMeasure::sphere(vec![0.0, 0.0], 1.0).unwrap(),
    ];
    for base in bases {
        for n in [2, 3] {
            let p = WeightMeasure::conv_power(base.clone(), n).unwrap();
            let count = 50_000;
            let s = p.sample(n as u64, count).unwrap();
            for _ in 0..20 {
                let xi: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
                let ecf: Complex64 = s
                    .iter()
                    .map(|x| Complex64::from_polar(1.0, 2.0 * PI * (xi[0] * x[0] + xi[1] * x[1])))
                    .sum::<Complex64>()
                    / count as f64;
                let target = base.fourier(&xi).powu(n as u32);
                assert!((ecf - target).norm() < 4.0 / (count as f64).sqrt());
            }
        }
    }
}

proptest! {
    #[test]
    fn transform_is_bounded(x in -8.0f64..8.0, y in -8.0f64..8.0, z in -8.0f64..8.0) {
        let ms = [
            WeightMeasure::sphere(vec![0.3, 0.0, -1.0], 0.8).unwrap(),
            WeightMeasure::moment_curve(3).unwrap(),
            WeightMeasure::conv_power(WeightMeasure::moment_curve(3).unwrap(), 2).unwrap(),
            WeightMeasure::uniform_box(BoxRegion::unit(3)).unwrap(),
        ];
        for m in &ms {
            prop_assert!(m.fourier(&[x, y, z]).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn conv_power_transform_is_power(x in -5.0f64..5.0, y in -5.0f64..5.0, n in 1usize..5) {
        let base = WeightMeasure::sphere(vec![0.1, 0.2], 1.5).unwrap();
        let p = WeightMeasure::conv_power(base.clone(), n).unwrap();
        let b = base.fourier(&[x, y]);
        let mut expect = b;
        for _ in 1..n { expect *= b; }
        prop_assert_eq!(p.fourier(&[x, y]), expect);
    }
}
