//! Translation multiflows on the torus and trigonometric observables.
//!
//! `T_s x = x + A·s (mod 1)` for a D×d matrix `A` is an action of ℝ^d on the
//! D-torus preserving Haar measure. A character `e_k(x) = exp(2πi k·x)`
//! transforms as `e_k(T_s x) = exp(2πi (Aᵀk)·s) e_k(x)`, so the action is
//! ergodic iff `Aᵀk ≠ 0` for every nonzero integer `k`.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{config, Error, Result};

/// `|Aᵀk|` below this counts as a resonance.
pub const CERTIFICATE_THRESHOLD: f64 = 1e-12;

/// Frequency radius used when none is given.
pub const DEFAULT_CERTIFICATE_RADIUS: u32 = 50;

/// Largest number of frequency vectors a certificate scan will visit.
pub const DEFAULT_SCAN_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusMultiflow {
    /// Row-major D×d.
    matrix: Vec<Vec<f64>>,
    time_dim: usize,
}

impl TorusMultiflow {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = matrix.first() else {
            return config("flow matrix needs at least one row");
        };
        let time_dim = first.len();
        if time_dim == 0 {
            return config("flow matrix needs at least one column");
        }
        if matrix.iter().any(|row| row.len() != time_dim) {
            return config("flow matrix rows must have equal length");
        }
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return config("flow matrix entries must be finite");
        }
        Ok(TorusMultiflow { matrix, time_dim })
    }

    /// `A = I` on the d-torus.
    pub fn identity(d: usize) -> Self {
        let matrix = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        TorusMultiflow { matrix, time_dim: d }
    }

    pub fn torus_dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn time_dim(&self) -> usize {
        self.time_dim
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// `T_s x = x + A s (mod 1)`, reduced into [0, 1).
    pub fn act(&self, s: &[f64], x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(s.len(), self.time_dim);
        self.matrix
            .iter()
            .zip(x)
            .map(|(row, xi)| {
                let shift: f64 = row.iter().zip(s).map(|(a, b)| a * b).sum();
                wrap(xi + shift)
            })
            .collect()
    }

    /// `Aᵀk`, the frequency at which the character `e_k` rotates along the flow.
    pub fn frequency(&self, k: &[i64]) -> Vec<f64> {
        debug_assert_eq!(k.len(), self.torus_dim());
        let mut out = vec![0.0; self.time_dim];
        for (row, &ki) in self.matrix.iter().zip(k) {
            if ki != 0 {
                for (o, a) in out.iter_mut().zip(row) {
                    *o += ki as f64 * a;
                }
            }
        }
        out
    }

    pub fn ergodicity_certificate(&self, radius: u32) -> Result<ErgodicityCertificate> {
        self.ergodicity_certificate_with_budget(radius, DEFAULT_SCAN_BUDGET)
    }

    /// Scan `0 < ‖k‖∞ ≤ radius` shell by shell. Within a shell, vectors are
    /// visited in lexicographic order and only the representative of each
    /// ±k pair whose first nonzero entry is positive is evaluated.
    pub fn ergodicity_certificate_with_budget(
        &self,
        radius: u32,
        budget: u64,
    ) -> Result<ErgodicityCertificate> {
        if radius == 0 {
            return config("certificate radius must be at least 1");
        }
        let dim = self.torus_dim();
        let mut cert = ErgodicityCertificate {
            search_radius: radius,
            min_frequency_norm: f64::INFINITY,
            offending_k: None,
            threshold: CERTIFICATE_THRESHOLD,
        };
        let mut scanned: u64 = 0;
        for shell in 1..=radius as i64 {
            let mut k = vec![-shell; dim];
            loop {
                let canonical = k.iter().find(|v| **v != 0).is_some_and(|v| *v > 0);
                if canonical {
                    if scanned == budget {
                        cert.search_radius = (shell - 1) as u32;
                        return Err(Error::Budget {
                            budget,
                            scanned,
                            partial: Box::new(cert),
                        });
                    }
                    scanned += 1;
                    let n = norm(&self.frequency(&k));
                    if n < cert.min_frequency_norm {
                        cert.min_frequency_norm = n;
                    }
                    if n < cert.threshold && cert.offending_k.is_none() {
                        cert.offending_k = Some(k.clone());
                    }
                }
                if !next_on_shell(&mut k, shell) {
                    break;
                }
            }
        }
        Ok(cert)
    }
}

fn wrap(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lexicographic successor of `k` among vectors with `‖k‖∞ = r`.
/// Starts from `(-r, …, -r)`, which is on the shell.
fn next_on_shell(k: &mut [i64], r: i64) -> bool {
    let last = k.len() - 1;
    for i in (0..k.len()).rev() {
        if k[i] < r {
            k[i] += 1;
            // With an interior prefix only the last entry can reach the shell.
            if k[..last].iter().all(|v| v.abs() < r) && k[last].abs() < r {
                k[last] = r;
            }
            return true;
        }
        k[i] = -r;
    }
    false
}

/// Finite evidence for ergodicity: no resonance `Aᵀk ≈ 0` up to the search radius.
/// A passing certificate is necessary but does not prove ergodicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityCertificate {
    pub search_radius: u32,
    pub min_frequency_norm: f64,
    pub offending_k: Option<Vec<i64>>,
    pub threshold: f64,
}

impl ErgodicityCertificate {
    pub fn passed(&self) -> bool {
        self.offending_k.is_none()
    }

    pub fn label(&self) -> &'static str {
        if self.passed() {
            "PASSED (finite-radius evidence, not a proof)"
        } else {
            "FAILED"
        }
    }
}

/// One Fourier mode `c·exp(2πi k·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub k: Vec<i64>,
    pub c: Complex64,
}

/// `f(x) = Σ c_k exp(2πi k·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigObservable {
    torus_dim: usize,
    modes: Vec<Mode>,
    real_valued: bool,
}

impl TrigObservable {
    pub fn new(torus_dim: usize, modes: Vec<Mode>, real_valued: bool) -> Result<Self> {
        if torus_dim == 0 {
            return config("observable needs a torus dimension ≥ 1");
        }
        let mut seen = HashSet::new();
        for m in &modes {
            if m.k.len() != torus_dim {
                return config(format!("mode {:?} does not live on the {torus_dim}-torus", m.k));
            }
            if !(m.c.re.is_finite() && m.c.im.is_finite()) {
                return config("mode coefficients must be finite");
            }
            if !seen.insert(m.k.clone()) {
                return config(format!("duplicate frequency {:?}", m.k));
            }
        }
        if real_valued {
            for m in &modes {
                let neg: Vec<i64> = m.k.iter().map(|v| -v).collect();
                let partner = modes.iter().find(|o| o.k == neg);
                match partner {
                    Some(p) if p.c == m.c.conj() => {}
                    _ => {
                        return config(format!(
                            "real-valued observable lacks the conjugate partner of {:?}",
                            m.k
                        ))
                    }
                }
            }
        }
        Ok(TrigObservable {
            torus_dim,
            modes,
            real_valued,
        })
    }

    pub fn single(k: Vec<i64>, c: Complex64) -> Result<Self> {
        let d = k.len();
        Self::new(d, vec![Mode { k, c }], false)
    }

    pub fn constant(torus_dim: usize, c: Complex64) -> Self {
        TrigObservable {
            torus_dim,
            modes: vec![Mode {
                k: vec![0; torus_dim],
                c,
            }],
            real_valued: c.im == 0.0,
        }
    }

    pub fn torus_dim(&self) -> usize {
        self.torus_dim
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        let v: Complex64 = self
            .modes
            .iter()
            .map(|m| m.c * character(&m.k, x))
            .sum();
        if self.real_valued {
            Complex64::new(v.re, 0.0)
        } else {
            v
        }
    }

    /// Haar mean: the zero-mode coefficient.
    pub fn mean(&self) -> Complex64 {
        self.modes
            .iter()
            .find(|m| m.k.iter().all(|v| *v == 0))
            .map(|m| m.c)
            .unwrap_or_default()
    }

    /// The observable with its zero mode removed.
    pub fn centered(&self) -> TrigObservable {
        TrigObservable {
            torus_dim: self.torus_dim,
            modes: self
                .modes
                .iter()
                .filter(|m| m.k.iter().any(|v| *v != 0))
                .cloned()
                .collect(),
            real_valued: self.real_valued,
        }
    }

    /// Same frequencies, coefficients mapped through `f(k, c)`.
    pub fn map_coefficients<F: FnMut(&[i64], Complex64) -> Complex64>(&self, mut f: F) -> TrigObservable {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode {
                k: m.k.clone(),
                c: f(&m.k, m.c),
            })
            .collect::<Vec<_>>();
        let real_valued = self.real_valued
            && modes.iter().all(|m| {
                let neg: Vec<i64> = m.k.iter().map(|v| -v).collect();
                modes.iter().any(|o| o.k == neg && o.c == m.c.conj())
            });
        TrigObservable {
            torus_dim: self.torus_dim,
            modes,
            real_valued,
        }
    }

    pub fn max_frequency(&self) -> i64 {
        self.modes
            .iter()
            .flat_map(|m| m.k.iter().map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// `exp(2πi k·x)`.
pub fn character(k: &[i64], x: &[f64]) -> Complex64 {
    let phase: f64 = k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
    Complex64::from_polar(1.0, 2.0 * PI * phase)
}
