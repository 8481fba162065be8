//! Worst-case and ideal GMRES approximation problems for small dense
//! matrices.
//!
//! The crate computes, certifies, and reproduces two quantities attached
//! to a nonsingular matrix `A` and a step index `k`:
//!
//! * the worst-case GMRES value `psi_k(A)`: the maximum over unit initial
//!   vectors of the step-`k` GMRES residual norm (a nonconvex max-min
//!   problem, solved by multi-start projected ascent with stationarity
//!   certificates), and
//! * the ideal GMRES value `phi_k(A)`: the minimum over normalized
//!   polynomials of the spectral norm `||p(A)||` (a convex nonsmooth
//!   problem, solved by a proximal bundle method).
//!
//! Supporting machinery includes the matrix families on which the two
//! values are known to differ, cross iterations and the cross-equality
//! test for worst-case initial vectors, equality certificates built from
//! singular-vector orthogonality conditions, and the real/complex field
//! variants of both problems.
//!
//! Polynomials are represented by coefficient vectors `c` with
//! `p(z; c) = 1 - sum_j c_j z^j`, so `p(0) = 1` by construction.

pub mod crossiter;
pub mod error;
pub mod experiments;
pub mod fieldvariants;
pub mod idealsolver;
pub mod krylov;
pub mod matgen;
pub mod tol;
pub mod wcsolver;

mod linalg;

pub use error::{Error, Result};
