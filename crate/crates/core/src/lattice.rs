//! Rank-1 lattice rules on the D-torus.
//!
//! Points `x_i = frac(i·z / N)` for a generator `z`. The generator is fixed by
//! `(N, D)`: `z_j = round(N·α^{j})` with `α = 1/φ_D`, where `φ_D` is the
//! positive root of `x^{D+1} = x + 1`. With `N` prime every one-dimensional
//! projection is a full equispaced grid.

#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Lattice {
    points: usize,
    generator: Vec<u64>,
}

/// Positive root of x^{D+1} = x + 1.
fn generalized_golden(dim: usize) -> f64 {
    let mut x: f64 = 2.0;
    for _ in 0..200 {
        x = (1.0 + x).powf(1.0 / (dim as f64 + 1.0));
    }
    x
}

impl Rank1Lattice {
    pub fn new(points: usize, dim: usize) -> Self {
        assert!(points >= 1 && dim >= 1);
        let n = points as u64;
        let alpha = 1.0 / generalized_golden(dim);
        let mut generator = vec![1u64];
        let mut a = 1.0;
        for _ in 1..dim {
            a *= alpha;
            let mut z = (points as f64 * a).round() as u64 % n;
            if z == 0 {
                z = 1;
            }
            generator.push(z);
        }
        Rank1Lattice { points, generator }
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn generator(&self) -> &[u64] {
        &self.generator
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let n = self.points as u64;
        self.generator
            .iter()
            .map(|z| ((i as u64 % n) * z % n) as f64 / n as f64)
            .collect()
    }
}
