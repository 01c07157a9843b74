//! Default numerical tolerances used across the crate.
//!
//! Every check that compares floating-point results against an identity has
//! its threshold defined here rather than inline, so the accuracy contract of
//! the whole toolkit is visible in one place.

/// Max entry deviation of `M†M` from the identity for a matrix to count as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Max entry deviation of `VΛV†` from the input for the symmetric eigensolver.
pub const EIG_RECONSTRUCTION_TOL: f64 = 1e-8;

/// Squared-norm deviation from 1 for a state vector to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Off-diagonal Frobenius norm (relative to the input scale) at which the
/// cyclic Jacobi sweep stops.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-12;

/// Max deviation of a transition-matrix row sum from 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Max deviation allowed in `p_yx π_x = p_xy π_y` for a chain built by the
/// Metropolis constructor.
pub const DETAILED_BALANCE_TOL: f64 = 1e-12;

/// Max residual of `πᵀP − πᵀ` accepted from the stationary-distribution solver.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// Asymmetry allowed in a matrix passed to the symmetric eigensolver.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Detailed-balance residual below which a chain is treated as reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

/// Deviation of an input state from an exact eigenvector accepted by the
/// strict phase-estimation entry point.
pub const EIGENVECTOR_TOL: f64 = 1e-8;
