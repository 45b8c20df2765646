//! Numerical tolerances shared by the decompositions, detectors and checks.
//!
//! All thresholds assume double precision on O(1)-magnitude Rayleigh entries.

/// Bound on `|c|^2 + |s|^2 - 1` for a Givens rotation.
pub const GIVENS_NORM: f64 = 1e-12;

/// Reconstruction bound for the SVD, relative to `max(1, ||A||_F)`.
pub const SVD_RECONSTRUCTION: f64 = 1e-10;

/// Bound on `||A* A - I||_F` for unitary factors.
pub const UNITARITY: f64 = 1e-10;

/// Effective-channel and reconstruction bound for the beamformers.
pub const FACTOR_RECONSTRUCTION: f64 = 1e-9;

/// Relative equality of the GMD diagonal entries.
pub const EQUAL_DIAGONAL: f64 = 1e-9;

/// Relative conservation of the singular-value product.
pub const PRODUCT_CONSERVATION: f64 = 1e-8;

/// Smallest singular value accepted as a usable subchannel.
pub const RANK: f64 = 1e-12;

/// Relative off-diagonal threshold at which a Jacobi pair counts as orthogonal.
pub const JACOBI_ORTHOGONALITY: f64 = 1e-15;

/// Sweep budget for the one-sided Jacobi SVD.
pub const JACOBI_MAX_SWEEPS: usize = 60;
