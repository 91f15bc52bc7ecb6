//! Convolution powers and the geometry that makes them absolutely continuous.
//!
//! Absolute continuity cannot be decided from finitely many samples, so
//! [`ac_diagnostic`] reports falsifiable statistics instead of a verdict:
//! how the largest histogram cell behaves under refinement, the total
//! variation between two disjoint halves of the sample, and cells whose mass
//! refuses to split (atom suspects).

mod general_position;
mod histogram;
mod sphere_geometry;

pub use general_position::{general_position_check, tangent_determinant, GeneralPositionReport};
pub use histogram::{
    ac_diagnostic, ac_diagnostic_samples, estimate_density, AcDiagnosticReport, AtomSuspect,
    HistogramDensity, ATOM_REFINEMENT_FACTOR, MIN_DIAGNOSTIC_SAMPLES,
};
pub use sphere_geometry::{
    disintegration_test, jacobian_scan, sphere_angles, sphere_point, sum_map_jacobian,
    sum_map_jacobian_fd, ColatitudeLaw, DisintegrationReport, JacobianEval, JacobianScan,
    DEFAULT_DEGENERACY_THRESHOLD, MIN_DISINTEGRATION_SAMPLES, MIN_SCAN_TRIALS,
};
