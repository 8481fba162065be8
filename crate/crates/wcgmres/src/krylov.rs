//! Core GMRES computations: residual minimization over the normalized
//! polynomial class, the minimizing coefficients, Krylov bases, and
//! minimal-polynomial degrees. Real and complex scalars are supported.
//!
//! The residual is computed through an orthonormalized Krylov basis
//! (modified Gram-Schmidt with one reorthogonalization pass) followed by a
//! small triangular solve. Power bases of the ill-conditioned test
//! families square the condition number under normal equations, so that
//! formulation is used only as a cross-check oracle in the tests.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{mgs, power_columns, random_unit_vector, rank_drop_tol};
use crate::matgen::block_diag_double;
use crate::tol;

/// Coefficients `c` of the residual polynomial
/// `p(z; c) = 1 - sum_{j=1..k} c_j z^j`, so `p(0) = 1` for every `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    coeffs: DVector<f64>,
}

impl PolyCoeffs {
    pub fn new(coeffs: DVector<f64>) -> Self {
        Self { coeffs }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        Self {
            coeffs: DVector::from_column_slice(c),
        }
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            coeffs: DVector::zeros(k),
        }
    }

    /// Degree bound `k`.
    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coeffs.as_slice()
    }

    /// Scalar evaluation `p(z; c)`.
    pub fn eval(&self, z: f64) -> f64 {
        let mut zj = 1.0;
        let mut acc = 1.0;
        for &c in self.coeffs.iter() {
            zj *= z;
            acc -= c * zj;
        }
        acc
    }

    /// `p(A; c) v` by repeated multiplication.
    pub fn apply(&self, a: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut acc = v.clone();
        let mut w = v.clone();
        for &c in self.coeffs.iter() {
            w = a * &w;
            acc -= &w * c;
        }
        acc
    }

    /// The dense matrix `p(A; c)`.
    pub fn matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        let mut acc = DMatrix::identity(n, n);
        let mut m = DMatrix::identity(n, n);
        for &c in self.coeffs.iter() {
            m = &m * a;
            acc -= &m * c;
        }
        acc
    }

    /// Coefficients of `p(-z; c)`: odd powers change sign.
    pub fn conjugate_z(&self) -> Self {
        let mut c = self.coeffs.clone();
        for j in 0..c.len() {
            if j % 2 == 0 {
                c[j] = -c[j];
            }
        }
        Self { coeffs: c }
    }
}

/// Scalar field over which the polynomial coefficients range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffField {
    Real,
    Complex,
}

/// Result of a `k`-step GMRES residual computation.
#[derive(Debug, Clone)]
pub struct GmresResult {
    pub residual: DVector<f64>,
    pub residual_norm: f64,
    /// The minimizer `gamma(b)`; the minimum-norm least-squares solution
    /// when the problem is degenerate.
    pub coeffs: PolyCoeffs,
    /// `max_j |<A^j b, r>| / (||A^j b|| ||r||)`, zero for a vanishing
    /// residual.
    pub ortho_defect: f64,
    /// Set when `d(A, b) <= k`, i.e. the Krylov columns are dependent or
    /// the residual vanishes to tolerance.
    pub degenerate: bool,
}

/// Complex counterpart of [`GmresResult`].
#[derive(Debug, Clone)]
pub struct ComplexGmresResult {
    pub residual: DVector<Complex<f64>>,
    pub residual_norm: f64,
    pub coeffs: DVector<Complex<f64>>,
    pub coeff_field: CoeffField,
    pub ortho_defect: f64,
    pub degenerate: bool,
}

/// The matrix `K(v) = [A v, A^2 v, ..., A^k v]` with its source vector.
#[derive(Debug, Clone)]
pub struct KrylovMatrix {
    pub columns: DMatrix<f64>,
    pub source_vector: DVector<f64>,
}

pub(crate) struct GmresCore<T: ComplexField> {
    pub residual: DVector<T>,
    pub residual_norm: f64,
    pub coeffs: DVector<T>,
    pub rank: usize,
    pub degenerate: bool,
    pub ortho_defect: f64,
}

pub(crate) fn gmres_core<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    b: &DVector<T>,
    k: usize,
    rank_tol: Option<f64>,
) -> Result<GmresCore<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {n}x{n} but vector has length {}",
            b.len()
        )));
    }
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, max: n });
    }
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Err(Error::ZeroVector);
    }

    let cols = power_columns(a, b, k, false);
    for col in &cols {
        if col.norm() < 1e-300 * b_norm {
            return Err(Error::SingularOperator);
        }
    }
    let drop_tol = rank_drop_tol(&cols, rank_tol);
    let orth = mgs(&cols, drop_tol);

    // Residual: project b out of the span of the orthonormalized columns.
    let mut residual = b.clone();
    let mut qtb = DVector::<T>::zeros(orth.rank);
    for (i, qi) in orth.q.iter().enumerate() {
        let h = qi.dotc(&residual);
        residual -= qi * h.clone();
        qtb[i] = h;
    }
    // One reorthogonalization pass on the residual as well.
    for (i, qi) in orth.q.iter().enumerate() {
        let h = qi.dotc(&residual);
        residual -= qi * h.clone();
        qtb[i] += h;
    }
    let residual_norm = residual.norm();

    let rank_deficient = orth.rank < k;
    let coeffs = if !rank_deficient {
        // Back-substitute R c = Q^H b.
        let mut c = qtb.clone();
        for i in (0..k).rev() {
            let mut s = c[i].clone();
            for j in (i + 1)..k {
                s -= orth.r[(i, j)].clone() * c[j].clone();
            }
            c[i] = s / orth.r[(i, i)].clone();
        }
        c
    } else {
        // Minimum-norm least-squares coefficients via SVD.
        let mut kmat = DMatrix::<T>::zeros(n, k);
        for (j, col) in cols.iter().enumerate() {
            kmat.set_column(j, col);
        }
        let svd = kmat.svd(true, true);
        svd.solve(b, T::RealField::from(drop_tol))
            .map(|m| m.column(0).into_owned())
            .unwrap_or_else(|_| DVector::zeros(k))
    };

    let degenerate = rank_deficient || residual_norm <= tol::DEGENERATE_REL_TOL * b_norm;
    let ortho_defect = if degenerate {
        0.0
    } else {
        cols.iter()
            .map(|col| {
                let num = col.dotc(&residual).modulus();
                num / (col.norm() * residual_norm)
            })
            .fold(0.0_f64, f64::max)
    };

    Ok(GmresCore {
        residual,
        residual_norm,
        coeffs,
        rank: orth.rank,
        degenerate,
        ortho_defect,
    })
}

/// The `k`-step GMRES residual for a real matrix and right-hand side:
/// `r_k = b - K(b) gamma(b)` with `gamma(b)` the least-squares minimizer,
/// satisfying `r_k` orthogonal to `span{A b, ..., A^k b}`.
pub fn gmres_residual(a: &DMatrix<f64>, b: &DVector<f64>, k: usize) -> Result<GmresResult> {
    let core = gmres_core(a, b, k, None)?;
    Ok(GmresResult {
        residual: core.residual,
        residual_norm: core.residual_norm,
        coeffs: PolyCoeffs::new(core.coeffs),
        ortho_defect: core.ortho_defect,
        degenerate: core.degenerate,
    })
}

/// GMRES for a complex right-hand side over a real matrix, minimizing
/// either over complex coefficients (a complex least-squares problem) or
/// over real coefficients via the doubled real block embedding
/// `||p(A)(u + i w)||^2 = ||p(A) u||^2 + ||p(A) w||^2`.
pub fn gmres_residual_complex(
    a: &DMatrix<f64>,
    b: &DVector<Complex<f64>>,
    k: usize,
    coeff_field: CoeffField,
) -> Result<ComplexGmresResult> {
    match coeff_field {
        CoeffField::Complex => {
            let ac = a.map(|x| Complex::new(x, 0.0));
            let core = gmres_core(&ac, b, k, None)?;
            Ok(ComplexGmresResult {
                residual: core.residual,
                residual_norm: core.residual_norm,
                coeffs: core.coeffs,
                coeff_field,
                ortho_defect: core.ortho_defect,
                degenerate: core.degenerate,
            })
        }
        CoeffField::Real => {
            let n = a.nrows();
            if b.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "operator is {n}x{n} but vector has length {}",
                    b.len()
                )));
            }
            let big = block_diag_double(a);
            let mut stacked = DVector::zeros(2 * n);
            for i in 0..n {
                stacked[i] = b[i].re;
                stacked[n + i] = b[i].im;
            }
            let core = gmres_core(&big, &stacked, k, None)?;
            let coeffs = PolyCoeffs::new(core.coeffs.clone());
            let residual = {
                let mut acc = b.clone();
                let ac = a.map(|x| Complex::new(x, 0.0));
                let mut w = b.clone();
                for &c in coeffs.as_slice() {
                    w = &ac * &w;
                    acc -= &w * Complex::new(c, 0.0);
                }
                acc
            };
            Ok(ComplexGmresResult {
                residual,
                residual_norm: core.residual_norm,
                coeffs: core.coeffs.map(|x| Complex::new(x, 0.0)),
                coeff_field,
                ortho_defect: core.ortho_defect,
                degenerate: core.degenerate,
            })
        }
    }
}

/// `K(v) = [A v, A^2 v, ..., A^k v]`, no normalization.
pub fn krylov_matrix(a: &DMatrix<f64>, v: &DVector<f64>, k: usize) -> Result<KrylovMatrix> {
    if a.ncols() != a.nrows() || v.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{}, vector length {}",
            a.nrows(),
            a.ncols(),
            v.len()
        )));
    }
    if k < 1 {
        return Err(Error::KOutOfRange { k, max: a.nrows() });
    }
    let cols = power_columns(a, v, k, false);
    let mut m = DMatrix::zeros(a.nrows(), k);
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    Ok(KrylovMatrix {
        columns: m,
        source_vector: v.clone(),
    })
}

/// The unique minimizer `gamma(v)` of `||v - K(v) c||` when the Krylov
/// columns have full numerical rank; errors with
/// [`Error::DegenerateVector`] otherwise.
pub fn gmres_polynomial(a: &DMatrix<f64>, v: &DVector<f64>, k: usize) -> Result<PolyCoeffs> {
    let core = gmres_core(a, v, k, None)?;
    if core.rank < k {
        return Err(Error::DegenerateVector { rank: core.rank, k });
    }
    Ok(PolyCoeffs::new(core.coeffs))
}

/// Degree of the minimal polynomial of `b` with respect to `A`: the
/// smallest `d` with `A^d b` numerically dependent on
/// `{b, A b, ..., A^{d-1} b}` under the rank threshold `tol`
/// (`n * eps * max column norm` when `None`).
pub fn min_poly_degree_vec(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: Option<f64>,
) -> Result<usize> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{}, vector length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if b.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cols = power_columns(a, b, n, true);
    let drop_tol = rank_drop_tol(&cols, tol);
    let orth = mgs(&cols, drop_tol);
    Ok(orth.rank)
}

/// Degree of the minimal polynomial of `A`, taken as the maximum of
/// `min_poly_degree_vec` over a small fixed set of seeded random vectors
/// (a random vector attains `d(A)` with probability one).
pub fn min_poly_degree(a: &DMatrix<f64>, tol: Option<f64>) -> Result<usize> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(0x6d70645f77636731);
    let mut d = 0;
    for _ in 0..4 {
        let v = random_unit_vector(n, &mut rng);
        d = d.max(min_poly_degree_vec(a, &v, tol)?);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{gen_jordan, gen_toh, TohParams};
    use approx::assert_relative_eq;

    fn rotation90() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    #[test]
    fn identity_terminates_at_step_one() {
        let a = DMatrix::<f64>::identity(5, 5);
        let b = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.0, 0.5]).normalize();
        let r = gmres_residual(&a, &b, 1).unwrap();
        assert!(r.residual_norm < 1e-14);
        assert!(r.degenerate);
        assert_relative_eq!(r.coeffs.as_slice()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_stagnates_completely() {
        let a = rotation90();
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let r = gmres_residual(&a, &b, 1).unwrap();
        assert_relative_eq!(r.residual_norm, 1.0, epsilon = 1e-14);
        assert!(r.coeffs.as_slice()[0].abs() < 1e-14);
        assert!(!r.degenerate);
    }

    #[test]
    fn toh_worst_case_vector_reproduces_published_value() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let b = DVector::from_vec(vec![-0.6376, 0.0471, 0.2188, 0.7371]).normalize();
        let r = gmres_residual(&a, &b, 3).unwrap();
        assert!((r.residual_norm - 0.4579).abs() < 1e-3, "{}", r.residual_norm);
        let c = r.coeffs.as_slice();
        assert!((c[0] - (-0.243)).abs() < 1e-2);
        assert!((c[1] - 0.895).abs() < 1e-2);
        assert!((c[2] - 0.025).abs() < 1e-2);
        assert!(r.ortho_defect < 1e-12);
    }

    #[test]
    fn random_case_matches_grid_refinement_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(6);
        let a = DMatrix::from_fn(6, 6, |_, _| {
            rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
        }) + DMatrix::identity(6, 6) * 3.0;
        let b = crate::linalg::random_unit_vector(6, &mut rng);
        let r = gmres_residual(&a, &b, 2).unwrap();

        // independent oracle: refine a 2-D grid around the normal-equations
        // solution of min ||b - c1 Ab - c2 A^2 b||
        let ab = &a * &b;
        let a2b = &a * &ab;
        let objective = |c1: f64, c2: f64| (&b - &ab * c1 - &a2b * c2).norm();
        let gram = DMatrix::from_row_slice(
            2,
            2,
            &[ab.dot(&ab), ab.dot(&a2b), ab.dot(&a2b), a2b.dot(&a2b)],
        );
        let rhs = DVector::from_vec(vec![ab.dot(&b), a2b.dot(&b)]);
        let ne = gram.lu().solve(&rhs).unwrap();
        let (mut c1, mut c2) = (ne[0], ne[1]);
        let mut half = 0.5 * (1.0 + c1.abs().max(c2.abs()));
        let mut best = objective(c1, c2);
        for _ in 0..40 {
            let (mut bc1, mut bc2) = (c1, c2);
            for i in -10..=10 {
                for j in -10..=10 {
                    let t1 = c1 + half * i as f64 / 10.0;
                    let t2 = c2 + half * j as f64 / 10.0;
                    let v = objective(t1, t2);
                    if v < best {
                        best = v;
                        bc1 = t1;
                        bc2 = t2;
                    }
                }
            }
            c1 = bc1;
            c2 = bc2;
            half *= 0.35;
        }
        assert_relative_eq!(r.residual_norm, best, max_relative = 1e-8);
    }

    #[test]
    fn complex_field_on_real_rhs_matches_real_solve() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let b = DVector::from_vec(vec![0.3, -0.4, 0.7, 0.2]).normalize();
        let bc = b.map(|x| Complex::new(x, 0.0));
        let real = gmres_residual(&a, &b, 2).unwrap();
        let cplx = gmres_residual_complex(&a, &bc, 2, CoeffField::Complex).unwrap();
        assert_relative_eq!(real.residual_norm, cplx.residual_norm, max_relative = 1e-12);
        for (cr, cc) in real.coeffs.as_slice().iter().zip(cplx.coeffs.iter()) {
            assert_relative_eq!(*cr, cc.re, max_relative = 1e-8);
            assert!(cc.im.abs() < 1e-10);
        }
    }

    #[test]
    fn real_field_embedding_identity() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let u = DVector::from_vec(vec![0.3, -0.4, 0.7, 0.2]);
        let w = DVector::from_vec(vec![-0.1, 0.9, 0.2, 0.5]);
        let scale = (u.norm_squared() as f64 + w.norm_squared() as f64).sqrt();
        let b = DVector::from_fn(4, |i, _| Complex::new(u[i], w[i])) / Complex::new(scale, 0.0);
        let res = gmres_residual_complex(&a, &b, 3, CoeffField::Real).unwrap();

        let big = block_diag_double(&a);
        let mut stacked = DVector::zeros(8);
        for i in 0..4 {
            stacked[i] = u[i] / scale;
            stacked[4 + i] = w[i] / scale;
        }
        let real = gmres_residual(&big, &stacked, 3).unwrap();
        assert_relative_eq!(
            res.residual_norm * res.residual_norm,
            real.residual_norm * real.residual_norm,
            max_relative = 1e-10
        );
    }

    #[test]
    fn complex_identity_is_degenerate() {
        let a = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![
            Complex::new(1.0, 0.5),
            Complex::new(0.0, -0.5),
            Complex::new(0.3, 0.0),
        ]);
        for field in [CoeffField::Real, CoeffField::Complex] {
            let r = gmres_residual_complex(&a, &b, 1, field).unwrap();
            assert!(r.residual_norm < 1e-12, "{field:?}: {}", r.residual_norm);
        }
    }

    #[test]
    fn krylov_matrix_examples() {
        let a = DMatrix::<f64>::identity(3, 3);
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let km = krylov_matrix(&a, &v, 2).unwrap();
        assert_eq!(km.columns.column(0), v);
        assert_eq!(km.columns.column(1), v);

        let d = DMatrix::from_partial_diagonal(2, 2, &[1.0, 2.0]);
        let v = DVector::from_vec(vec![1.0, 1.0]);
        let km = krylov_matrix(&d, &v, 2).unwrap();
        assert_eq!(km.columns.column(0).as_slice(), &[1.0, 2.0]);
        assert_eq!(km.columns.column(1).as_slice(), &[1.0, 4.0]);
    }

    #[test]
    fn gramian_matches_moment_formula() {
        let a = gen_toh(TohParams::new(0.8, 0.4).unwrap());
        let v = DVector::from_vec(vec![0.1, 0.2, -0.3, 0.4]);
        let km = krylov_matrix(&a, &v, 3).unwrap();
        let gram = km.columns.transpose() * &km.columns;
        for i in 1..=3usize {
            for j in 1..=3usize {
                let mut ai = v.clone();
                for _ in 0..i {
                    ai = &a * ai;
                }
                let mut aj = v.clone();
                for _ in 0..j {
                    aj = &a * aj;
                }
                assert_relative_eq!(gram[(i - 1, j - 1)], ai.dot(&aj), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn polynomial_closed_form_one_dimensional() {
        // c1 = <Av, v> / ||Av||^2 = 6/14 for A = diag(1,2,3), v = ones/sqrt(3)
        let a = DMatrix::from_partial_diagonal(3, 3, &[1.0, 2.0, 3.0]);
        let v = DVector::from_element(3, 1.0) / 3.0_f64.sqrt();
        let c = gmres_polynomial(&a, &v, 1).unwrap();
        assert_relative_eq!(c.as_slice()[0], 6.0 / 14.0, max_relative = 1e-12);
    }

    #[test]
    fn polynomial_rejects_degenerate_vector() {
        let a = DMatrix::<f64>::identity(3, 3);
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        match gmres_polynomial(&a, &v, 2) {
            Err(Error::DegenerateVector { rank, k }) => {
                assert_eq!(rank, 1);
                assert_eq!(k, 2);
            }
            other => panic!("expected degenerate-vector error, got {other:?}"),
        }
    }

    #[test]
    fn min_poly_degree_vec_examples() {
        let a = DMatrix::<f64>::identity(4, 4);
        let b = DVector::from_vec(vec![0.3, 0.1, -0.2, 0.9]);
        assert_eq!(min_poly_degree_vec(&a, &b, None).unwrap(), 1);

        let d = DMatrix::from_partial_diagonal(2, 2, &[1.0, 2.0]);
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(min_poly_degree_vec(&d, &e1, None).unwrap(), 1);

        // chain-structure oracle: explicit rank of [b, Ab, ...] grows to n
        for n in [3usize, 5, 8] {
            let j = gen_jordan(n, 1.0, 1.0).unwrap();
            let en = DVector::from_fn(n, |i, _| if i == n - 1 { 1.0 } else { 0.0 });
            assert_eq!(min_poly_degree_vec(&j, &en, None).unwrap(), n);
            let cols = crate::linalg::power_columns(&j, &en, n, true);
            let mut m = DMatrix::zeros(n, n + 1);
            for (jj, col) in cols.iter().enumerate() {
                m.set_column(jj, col);
            }
            assert_eq!(m.svd(false, false).rank(1e-10), n);
        }
    }

    #[test]
    fn min_poly_degree_examples() {
        assert_eq!(min_poly_degree(&DMatrix::identity(6, 6), None).unwrap(), 1);
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        assert_eq!(min_poly_degree(&a, None).unwrap(), 4);
        let d = DMatrix::from_partial_diagonal(3, 3, &[1.0, 1.0, 2.0]);
        assert_eq!(min_poly_degree(&d, None).unwrap(), 2);
    }

    #[test]
    fn residual_inner_product_identity() {
        // <b, r_k> = ||r_k||^2 for the computed residual
        let a = gen_toh(TohParams::new(1.3, 0.2).unwrap());
        let b = DVector::from_vec(vec![0.2, -0.7, 0.4, 0.5]).normalize();
        for k in 1..=3 {
            let r = gmres_residual(&a, &b, k).unwrap();
            assert_relative_eq!(
                b.dot(&r.residual),
                r.residual_norm * r.residual_norm,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn monotone_and_bounded_in_k() {
        let a = gen_jordan(8, 1.0, 1.0).unwrap();
        let b = DVector::from_fn(8, |i, _| (i as f64 * 0.7).sin()).normalize();
        let mut prev = 1.0 + 1e-15;
        for k in 1..=7 {
            let r = gmres_residual(&a, &b, k).unwrap();
            assert!(r.residual_norm <= prev + 1e-12, "k = {k}");
            assert!(r.residual_norm <= 1.0 + 1e-12);
            prev = r.residual_norm;
        }
    }

    #[test]
    fn normal_equations_cross_check() {
        // the analytic (K^T K)^{-1} K^T v route agrees on well-conditioned data
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for trial in 0..5 {
            let a = DMatrix::from_fn(5, 5, |_, _| {
                rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
            }) + DMatrix::identity(5, 5) * 4.0;
            let v = crate::linalg::random_unit_vector(5, &mut rng);
            let k = 2 + trial % 2;
            let km = krylov_matrix(&a, &v, k).unwrap();
            let gram = km.columns.transpose() * &km.columns;
            let rhs = km.columns.transpose() * &v;
            let gamma = gram.lu().solve(&rhs).unwrap();
            let ne_norm = (&v - &km.columns * &gamma).norm();
            let r = gmres_residual(&a, &v, k).unwrap();
            assert_relative_eq!(r.residual_norm, ne_norm, max_relative = 1e-8);
            assert!((DVector::from_column_slice(r.coeffs.as_slice()) - gamma).norm() < 1e-6);
        }
    }

    #[test]
    fn zero_rhs_rejected() {
        let a = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            gmres_residual(&a, &DVector::zeros(3), 1),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn k_out_of_range_rejected() {
        let a = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            gmres_residual(&a, &b, 0),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            gmres_residual(&a, &b, 4),
            Err(Error::KOutOfRange { .. })
        ));
    }

    #[test]
    fn poly_coeffs_conventions() {
        let p = PolyCoeffs::from_slice(&[-0.243, 0.895, 0.025]);
        // p(z) = 1 + 0.243 z - 0.895 z^2 - 0.025 z^3
        assert_relative_eq!(p.eval(0.0), 1.0);
        assert_relative_eq!(p.eval(1.0), 1.0 + 0.243 - 0.895 - 0.025, epsilon = 1e-15);
        let q = p.conjugate_z();
        assert_eq!(q.as_slice(), &[0.243, 0.895, -0.025]);
        assert_eq!(q.conjugate_z().as_slice(), p.as_slice());
    }
}
