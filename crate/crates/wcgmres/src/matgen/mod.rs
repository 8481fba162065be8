//! Generators for the matrix families used throughout the crate, plus
//! plain-text matrix interchange (Matrix Market conventions).
//!
//! All generators return square, nonsingular, real dense matrices. The
//! bidiagonal families have `|det| = 1` (product of the `±1` diagonal).
//! Boundary parameters are rejected rather than clamped because the
//! supported analysis requires strict inequalities.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub mod io;
pub use io::{read_matrix, read_vector, write_matrix, write_vector, MatrixData};

/// Parameters of the 4x4 Toh family: `0 < omega < 2`, `epsilon > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TohParams {
    pub omega: f64,
    pub epsilon: f64,
}

impl TohParams {
    pub fn new(omega: f64, epsilon: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 2.0) || !omega.is_finite() {
            return Err(Error::ParamOutOfRange(format!(
                "omega = {omega} not strictly inside (0, 2)"
            )));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::ParamOutOfRange(format!(
                "epsilon = {epsilon} must be strictly positive"
            )));
        }
        Ok(Self { omega, epsilon })
    }
}

/// The 4x4 upper bidiagonal Toh matrix with diagonal `(1, -1, 1, -1)`
/// and superdiagonal `(eps, omega/eps, eps)`.
pub fn gen_toh(params: TohParams) -> DMatrix<f64> {
    let TohParams { omega, epsilon } = params;
    let mut a = DMatrix::zeros(4, 4);
    for i in 0..4 {
        a[(i, i)] = if i % 2 == 0 { 1.0 } else { -1.0 };
    }
    a[(0, 1)] = epsilon;
    a[(1, 2)] = omega / epsilon;
    a[(2, 3)] = epsilon;
    a
}

/// `n x n` upper bidiagonal matrix with constant diagonal `lambda` and
/// constant superdiagonal `epsilon`. `epsilon = 1` gives the standard
/// Jordan block.
pub fn gen_jordan(n: usize, lambda: f64, epsilon: f64) -> Result<DMatrix<f64>> {
    if n < 1 {
        return Err(Error::ParamOutOfRange("jordan: n must be >= 1".into()));
    }
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::ParamOutOfRange(format!(
            "jordan: epsilon = {epsilon} must be nonzero"
        )));
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = lambda;
        if i + 1 < n {
            a[(i, i + 1)] = epsilon;
        }
    }
    Ok(a)
}

/// `n x n` bidiagonal matrix with alternating diagonal `(+1, -1, ...)`
/// and alternating superdiagonal `(eps, 1/eps, eps, ...)`. For `n = 4`
/// this equals the Toh matrix with `omega = 1`.
pub fn gen_alternating_bidiagonal(n: usize, epsilon: f64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::ParamOutOfRange(
            "alternating bidiagonal: n must be >= 2".into(),
        ));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::ParamOutOfRange(format!(
            "alternating bidiagonal: epsilon = {epsilon} must be positive"
        )));
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = if i % 2 == 0 { 1.0 } else { -1.0 };
        if i + 1 < n {
            a[(i, i + 1)] = if i % 2 == 0 { epsilon } else { 1.0 / epsilon };
        }
    }
    Ok(a)
}

/// Block upper-triangular `2n x 2n` matrix with bidiagonal blocks
/// `J_{1,eps}` and `J_{-1,eps}` on the diagonal and a coupling block
/// whose only nonzero entry is `omega/eps` in its bottom-left corner,
/// i.e. at position `(n, n+1)` of the full matrix (1-based).
pub fn gen_block_coupled(n: usize, omega: f64, epsilon: f64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::ParamOutOfRange("block coupled: n must be >= 2".into()));
    }
    if !(omega > 0.0) || !(epsilon > 0.0) || !omega.is_finite() || !epsilon.is_finite() {
        return Err(Error::ParamOutOfRange(format!(
            "block coupled: omega = {omega}, epsilon = {epsilon} must be positive"
        )));
    }
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, i)] = 1.0;
        a[(n + i, n + i)] = -1.0;
        if i + 1 < n {
            a[(i, i + 1)] = epsilon;
            a[(n + i, n + i + 1)] = epsilon;
        }
    }
    a[(n - 1, n)] = omega / epsilon;
    Ok(a)
}

/// Block diagonal `[A 0; 0 A]`.
pub fn block_diag_double(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "block_diag_double expects a square matrix");
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(a);
    b.view_mut((n, n), (n, n)).copy_from(a);
    b
}

/// The fixed orthogonal 4x4 sign-flip matrix `Q` with antidiagonal
/// entries `(+1, -1, +1, -1)` read from the top row down. It realizes
/// the similarity `A = -Q A^T Q^T` for every Toh matrix.
pub fn toh_flip_matrix() -> DMatrix<f64> {
    let mut q = DMatrix::zeros(4, 4);
    q[(0, 3)] = 1.0;
    q[(1, 2)] = -1.0;
    q[(2, 1)] = 1.0;
    q[(3, 0)] = -1.0;
    q
}
