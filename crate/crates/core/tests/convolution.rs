use std::f64::consts::PI;

use ergavg_core::convolution::{
    ac_diagnostic, ac_diagnostic_samples, estimate_density, general_position_check, jacobian_scan, sphere_point,
    sum_map_jacobian, sum_map_jacobian_fd, tangent_determinant, DEFAULT_DEGENERACY_THRESHOLD,
};
use ergavg_core::measures::{CurveMeasure, SphereMeasure, WeightMeasure};
use ergavg_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn moment_curve(d: usize) -> CurveMeasure {
    match WeightMeasure::moment_curve(d).unwrap() {
        WeightMeasure::Curve(c) => c,
        _ => unreachable!(),
    }
}

/// Determinant by permutation expansion, independent of any factorization.
fn leibniz(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, m, &mut total);
    total
}

fn permute(p: &mut Vec<usize>, i: usize, m: &[Vec<f64>], total: &mut f64) {
    if i == p.len() {
        let mut inversions = 0;
        for a in 0..p.len() {
            for b in a + 1..p.len() {
                if p[a] > p[b] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        *total += sign * (0..p.len()).map(|r| m[r][p[r]]).product::<f64>();
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, m, total);
        p.swap(i, j);
    }
}

proptest! {
    #[test]
    fn tangent_determinant_is_vandermonde(d in 2usize..=5, params in prop::collection::vec(0.0f64..1.0, 5)) {
        let r = &params[..d];
        let curve = moment_curve(d);
        let det = tangent_determinant(&curve, r).unwrap().abs();
        let mut factorial = 1.0;
        let mut prod = 1.0;
        for j in 0..d {
            factorial *= (j + 1) as f64;
            for i in 0..j {
                prod *= (r[j] - r[i]).abs();
            }
        }
        let expect = factorial * prod;
        prop_assume!(expect > 1e-12);
        prop_assert!((det - expect).abs() <= 1e-9 * expect, "{} vs {}", det, expect);

        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| r.iter().map(|x| (i + 1) as f64 * x.powi(i as i32)).collect())
            .collect();
        let brute = leibniz(&rows).abs();
        prop_assert!((det - brute).abs() <= 1e-10);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences(
        longitude in 0.0f64..(2.0 * PI),
        theta in 0.05f64..3.09,
        phi in 0.05f64..3.09,
        psi in 0.0f64..(2.0 * PI),
        radius in 0.5f64..3.0,
    ) {
        let sphere = SphereMeasure::new(vec![0.3, -0.2, 1.0], radius).unwrap();
        let a = sum_map_jacobian(longitude, theta, (phi, psi), &sphere).unwrap();
        prop_assert!(!a.coordinate_singular);
        prop_assume!(a.det.abs() > 1e-3);
        let fd = sum_map_jacobian_fd(longitude, theta, (phi, psi), &sphere, 1e-6).unwrap();
        prop_assert!((a.det - fd).abs() <= 1e-5 * a.det.abs(), "{} vs {}", a.det, fd);
    }
}

#[test]
fn general_position_across_dimensions() {
    for d in 2..=5 {
        let r = general_position_check(&WeightMeasure::moment_curve(d).unwrap(), 1000, 1e-12, d as u64).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.min_abs_det > 0.0);
    }
    let line = WeightMeasure::line(vec![1.0, 1.0]).unwrap();
    let r = general_position_check(&line, 1000, 1e-12, 0).unwrap();
    assert_eq!(r.failures, 1000);
    assert!(matches!(
        general_position_check(&WeightMeasure::sphere(vec![0.0; 2], 1.0).unwrap(), 10, 1e-12, 0),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn constructed_degenerate_pair() {
    let s = SphereMeasure::unit(3);
    let p = [0.0, 1.0, 0.0];
    let (phi, psi) = ergavg_core::convolution::sphere_angles(&s, &p);
    let q = sphere_point(&s, phi, psi);
    assert!(q.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-15));
    let j = sum_map_jacobian(0.0, PI / 2.0, (phi, psi), &s).unwrap();
    assert!(j.det.abs() < 1e-12);
    let (phi, psi) = ergavg_core::convolution::sphere_angles(&s, &[0.0, 0.0, 1.0]);
    let j = sum_map_jacobian(0.0, PI / 2.0, (phi, psi), &s).unwrap();
    assert!(j.det.abs() > 0.5);
}

#[test]
fn scan_fraction_shrinks_with_threshold() {
    let s = SphereMeasure::unit(3);
    let f: Vec<f64> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|t| jacobian_scan(&s, 20_000, *t, 8).unwrap().fraction)
        .collect();
    assert!(f[0] >= f[1] && f[1] >= f[2], "{f:?}");
    assert!(f[2] < 1e-3);
    assert!(jacobian_scan(&s, 1000, 10.0, 1).unwrap().fraction > 0.95);
    assert!(jacobian_scan(&s, 1000, f64::INFINITY, 1).is_err());
    let big = SphereMeasure::new(vec![0.0; 3], 3.0).unwrap();
    let scan = jacobian_scan(&big, 1000, DEFAULT_DEGENERACY_THRESHOLD, 1).unwrap();
    assert!((scan.scaled_threshold - 27e-6).abs() < 1e-18);
}

#[test]
fn uniform_histogram_concentrates() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s: Vec<Vec<f64>> = (0..100_000).map(|_| vec![rng.random::<f64>()]).collect();
    let h = estimate_density(&s, 10).unwrap();
    assert_eq!(h.total(), 100_000);
    assert!((0.08..=0.12).contains(&h.max_cell_fraction()));
}

#[test]
fn circle_self_convolution_has_no_heavy_cell() {
    let circle = WeightMeasure::sphere(vec![0.0, 0.0], 1.0).unwrap();
    let p = WeightMeasure::conv_power(circle, 2).unwrap();
    let s = p.sample(77, 1_000_000).unwrap();
    let h = estimate_density(&s, 40).unwrap();
    assert!(h.max_cell_fraction() < 0.02, "{}", h.max_cell_fraction());
}

#[test]
fn refinement_lowers_max_cell_fraction() {
    let p = WeightMeasure::conv_power(WeightMeasure::moment_curve(2).unwrap(), 2).unwrap();
    let n = 400_000;
    let s = p.sample(5, n).unwrap();
    let noise = 4.0 / (n as f64).sqrt();
    let mut prev = 1.0;
    for cells in [4, 8, 16, 32] {
        let f = estimate_density(&s, cells).unwrap().max_cell_fraction();
        assert!(f <= prev + noise, "{cells}: {f} > {prev}");
        prev = f;
    }
}

#[test]
fn planted_atom_is_detected() {
    let n = 5_000_000;
    let noise = 4.0 / (n as f64).sqrt();
    for w in [0.05, 0.3] {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let samples: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < w {
                    vec![0.37, 0.61]
                } else {
                    vec![rng.random::<f64>(), rng.random::<f64>()]
                }
            })
            .collect();
        let r = ac_diagnostic_samples(&samples, 30).unwrap();
        assert!(
            r.atom_suspects.iter().any(|a| a.fraction >= w - noise),
            "w = {w}: {:?}",
            r.atom_suspects
        );
    }
}

#[test]
fn point_mass_power_is_one_atom() {
    let m = WeightMeasure::conv_power(WeightMeasure::point_mass(vec![0.4, -1.0]).unwrap(), 3).unwrap();
    let r = ac_diagnostic(&m, 20_000, 30, 1).unwrap();
    assert_eq!(r.max_cell_fraction, 1.0);
    assert_eq!(r.atom_suspects.len(), 1);
    assert!(!r.not_conv_power);
    let flagged = ac_diagnostic(&WeightMeasure::moment_curve(2).unwrap(), 20_000, 10, 1).unwrap();
    assert!(flagged.not_conv_power);
}
