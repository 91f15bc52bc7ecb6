//! Numerical laboratory for singular geometric averages of ergodic torus multiflows.
//!
//! * [`measures`]: normalized weights on ℝ^d (densities, curves, spheres,
//!   convolution powers) with sampling, quadrature and Fourier transforms.
//! * [`multiflow`]: translation actions of ℝ^d on the D-torus, ergodicity
//!   certificates and trigonometric observables.
//! * [`averaging`]: the averaging operator `P_t f(x) = ∫ f(T_{t r} x) dν(r)`,
//!   its Fourier-multiplier oracle, L¹ errors and convergence sweeps.
//! * [`convolution`]: histogram diagnostics for convolution powers,
//!   general-position checks for curves and the sphere sum-map geometry.

pub mod averaging;
pub mod convolution;
pub mod error;
pub mod lattice;
pub mod measures;
pub mod multiflow;
pub mod presets;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use measures::WeightMeasure;
pub use multiflow::{TorusMultiflow, TrigObservable};
