//! Centralized tolerance constants.
//!
//! Every threshold used by the solvers and certificates lives here with a
//! short note on where it comes from, so no module carries ad-hoc magic
//! numbers.

/// Relative factor for the numerical-rank threshold of Krylov columns.
/// The absolute drop tolerance is `n * f64::EPSILON * max_column_norm`,
/// overridable by callers.
pub const RANK_TOL_FACTOR: f64 = f64::EPSILON;

/// A GMRES residual below this fraction of `||b||` is treated as exact
/// termination (`k >= d(A,b)`), and the result is flagged degenerate.
pub const DEGENERATE_REL_TOL: f64 = 1e-12;

/// Orthogonality defect bound for well-conditioned desk-scale inputs.
pub const ORTHO_DEFECT_TOL: f64 = 1e-10;

/// Absolute slack allowed in the interlacing chain of cross iterations.
pub const INTERLACE_SLACK: f64 = 1e-12;

/// Default relative-gap stopping tolerance for cross iterations.
pub const CROSS_TOL: f64 = 1e-12;

/// Default iteration cap for cross iterations.
pub const CROSS_MAX_ITER: usize = 500;

/// Default tangential-gradient norm at which a worst-case ascent is
/// considered certified stationary.
pub const ASCENT_TOL: f64 = 1e-10;

/// Certificate bound on the singular-vector identity residual,
/// relative to `psi^2`.
pub const SINGVEC_REL_TOL: f64 = 1e-8;

/// Relative gap under which two leading singular values are treated as a
/// single multiple value.
pub const SIGMA_MULTIPLICITY_REL: f64 = 1e-8;

/// Default orthogonality-defect threshold for the ideal/worst-case
/// equality certificate.
pub const EQUALITY_DEFECT_TOL: f64 = 1e-6;

/// Defect must exceed this multiple of the equality tolerance before a
/// `strict` verdict is allowed.
pub const STRICT_DEFECT_FACTOR: f64 = 100.0;

/// Value gap `phi - psi` required for a `strict` verdict.
pub const STRICT_GAP_TOL: f64 = 1e-6;

/// Angular samples of the top singular subspace in the equality
/// certificate when the maximal singular value is twofold.
pub const EQUALITY_ANGULAR_SAMPLES: usize = 720;

/// Default stopping tolerance (relative predicted decrease) for the
/// ideal GMRES bundle solver.
pub const IDEAL_TOL: f64 = 1e-13;

/// Default iteration cap for the ideal GMRES bundle solver.
pub const IDEAL_MAX_ITERS: usize = 300;
