//! Building blocks shared by the shipped experiment presets.

use num_complex::Complex64;

use crate::error::{config, Result};
use crate::multiflow::{Mode, TorusMultiflow, TrigObservable};

const PRIMES: [u32; 30] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113,
];

/// `rows × cols` matrix of square roots of distinct primes, filled row by row.
///
/// Square roots of distinct primes are linearly independent over ℚ, so
/// `Aᵀk = 0` forces `k = 0` and the translation action is ergodic.
pub fn prime_root_matrix(rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
    if rows * cols > PRIMES.len() {
        return config(format!("prime-root matrices are limited to {} entries", PRIMES.len()));
    }
    Ok((0..rows)
        .map(|i| (0..cols).map(|j| (PRIMES[i * cols + j] as f64).sqrt()).collect())
        .collect())
}

/// Ergodic flow of ℝ^time_dim on the (time_dim + 1)-torus.
pub fn prime_root_flow(time_dim: usize) -> Result<TorusMultiflow> {
    TorusMultiflow::new(prime_root_matrix(time_dim + 1, time_dim)?)
}

/// Five nonzero modes with mixed complex coefficients on the D-torus, D ≥ 2.
pub fn five_mode_observable(torus_dim: usize) -> Result<TrigObservable> {
    if torus_dim < 2 {
        return config("the five-mode observable needs a torus of dimension at least 2");
    }
    let last = torus_dim - 1;
    let unit = |entries: &[(usize, i64)]| {
        let mut k = vec![0i64; torus_dim];
        for (i, v) in entries {
            k[*i] += v;
        }
        k
    };
    let modes = vec![
        Mode { k: unit(&[(0, 1)]), c: Complex64::new(1.0, 0.0) },
        Mode { k: unit(&[(1, 1)]), c: Complex64::new(0.0, 0.5) },
        Mode { k: unit(&[(0, 1), (1, -1)]), c: Complex64::new(-0.4, 0.3) },
        Mode { k: unit(&[(0, 2), (last, 1)]), c: Complex64::new(0.25, 0.0) },
        Mode { k: unit(&[(0, -1), (last, 3)]), c: Complex64::new(0.1, -0.2) },
    ];
    TrigObservable::new(torus_dim, modes, false)
}

/// `t_0·ρ^i`, `count` points from `start` to `stop` inclusive.
pub fn geometric_schedule(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(start > 0.0 && stop > start && stop.is_finite()) {
        return config("geometric schedule needs 0 < start < stop and at least 2 points");
    }
    let ratio = (stop / start).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| start * (ratio * i as f64).exp()).collect();
    out[count - 1] = stop;
    Ok(out)
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linear_schedule(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(start.is_finite() && stop.is_finite() && stop > start) {
        return config("linear schedule needs start < stop and at least 2 points");
    }
    let step = (stop - start) / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
    out[count - 1] = stop;
    Ok(out)
}
