//! Named numerical tolerances shared across modules and tests.

/// Relative accuracy targeted by lattice theta sums.
pub const THETA_REL: f64 = 1e-15;

/// Cap on the number of terms in a one-dimensional lattice series.
pub const MAX_SERIES_TERMS: usize = 50_000_000;

/// Upper limit on the number of many-body states an enumeration may visit.
pub const STATE_GUARD: f64 = 1e8;

/// Absolute error target of the Gaussian CDF quadrature.
pub const CDF_QUAD_ABS: f64 = 1e-13;

/// Absolute error target of Fejér and Dirichlet kernel integrals.
pub const KERNEL_QUAD_ABS: f64 = 1e-11;

/// Relative slack (times the Gram trace) for positive-semidefiniteness.
pub const PSD_REL: f64 = 1e-10;

/// Tolerance on energy comparisons in boost checks, relative to `max(1, |E|)`.
pub const BOOST_MATCH: f64 = 1e-12;

/// Largest unwrapped phase step accepted between neighbouring samples.
/// Steps closer to π cannot be told apart from aliased ones.
pub const MAX_PHASE_STEP: f64 = 0.9 * std::f64::consts::PI;
