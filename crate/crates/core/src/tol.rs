//! Numerical tolerances shared across the crate.
//!
//! Every threshold that decides validity of an input or convergence of a
//! method lives here, so the tests and the implementation agree on one table.

/// Maximum `|A[i][j] - conj(A[j][i])|` accepted for a Hermitian operator.
pub const HERMITIAN: f64 = 1e-12;

/// Jacobi sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the Frobenius norm of the input.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-13;

/// Upper bound on Jacobi sweeps; quadratic convergence makes ~10 typical.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Default slack for positive-semidefiniteness tests.
pub const PSD: f64 = 1e-9;

/// POVM completeness `|sum(E) - I|` for constructed measurements.
pub const COMPLETENESS: f64 = 1e-9;

/// Completeness slack for the literal POVMs whose vectors are given to four
/// decimal places.
pub const LITERAL_COMPLETENESS: f64 = 2e-3;

/// Margin kept from the Bloch sphere surface before evaluating SLD and QFI
/// closed forms, which divide by `1 - |theta|^2`.
pub const BLOCH_MARGIN: f64 = 1e-9;

/// States closer than this to the surface are rejected by the SDP bound.
pub const SDP_BLOCH_MARGIN: f64 = 1e-6;

/// Outcomes with probability and derivative both below this contribute
/// nothing to the classical Fisher information.
pub const FISHER_CUTOFF: f64 = 1e-12;

/// Most negative probability tolerated before clipping to zero.
pub const NEGATIVE_PROBABILITY: f64 = 1e-12;

/// Probability vectors must sum to one within this slack.
pub const PROBABILITY_SUM: f64 = 1e-9;

/// SDP stopping rule on relative duality gap and relative dual residual.
pub const SDP_GAP: f64 = 1e-8;

/// Relative gap and residual accepted when the SDP iteration breaks down
/// numerically before reaching [`SDP_GAP`].
pub const SDP_ACCEPT: f64 = 1e-6;

/// SDP iteration cap.
pub const SDP_MAX_ITERATIONS: usize = 200;

/// Bound on `|residual|` for a point accepted as lying on the single-copy
/// trade-off surface.
pub const ON_BOUNDARY: f64 = 1e-6;

/// Feasibility slack when filtering candidate vertices of a surface scan.
pub const VERTEX_FEASIBILITY: f64 = 1e-6;

/// Vertices closer than this are merged.
pub const VERTEX_MERGE: f64 = 1e-7;

/// Plane triples whose normals are this close to coplanar are skipped.
pub const PARALLEL_NORMALS: f64 = 1e-10;

/// Radius of the ball searched by maximum likelihood.
pub const MLE_RADIUS: f64 = 1.0 - 1e-6;

/// Projected-gradient norm (of the per-count log-likelihood) accepted as a
/// maximum.
pub const MLE_GRADIENT: f64 = 1e-7;

/// Maximum-likelihood iteration cap.
pub const MLE_MAX_ITERATIONS: usize = 2000;

/// Armijo sufficient-increase constant for the likelihood line search.
pub const ARMIJO: f64 = 1e-4;
