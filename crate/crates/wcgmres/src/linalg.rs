//! Small dense linear-algebra helpers shared by the solver modules.

use nalgebra::{ComplexField, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::tol;

/// Columns `[A v, A^2 v, ..., A^count v]`, optionally prefixed by `v`
/// itself, computed by repeated multiplication.
pub(crate) fn power_columns<T: ComplexField>(
    a: &DMatrix<T>,
    v: &DVector<T>,
    count: usize,
    include_v: bool,
) -> Vec<DVector<T>> {
    let mut cols = Vec::with_capacity(count + usize::from(include_v));
    if include_v {
        cols.push(v.clone());
    }
    let mut w = v.clone();
    for _ in 0..count {
        w = a * &w;
        cols.push(w.clone());
    }
    cols
}

/// Dense powers `A^1 .. A^count`.
pub(crate) fn matrix_powers(a: &DMatrix<f64>, count: usize) -> Vec<DMatrix<f64>> {
    let mut powers = Vec::with_capacity(count);
    let mut m = a.clone();
    for _ in 0..count {
        powers.push(m.clone());
        m = &m * a;
    }
    powers.truncate(count);
    powers
}

/// Result of a rank-revealing modified Gram-Schmidt factorization.
///
/// Columns are processed in order; the factorization stops at the first
/// column that is numerically dependent on its predecessors (for Krylov
/// sequences all later columns are then dependent as well).
pub(crate) struct Ortho<T: ComplexField> {
    pub q: Vec<DVector<T>>,
    /// Upper-triangular factor; only the leading `rank` rows are filled.
    pub r: DMatrix<T>,
    pub rank: usize,
}

/// Modified Gram-Schmidt with one reorthogonalization pass and an
/// absolute drop tolerance for dependent columns.
pub(crate) fn mgs<T: ComplexField<RealField = f64>>(
    cols: &[DVector<T>],
    drop_tol: f64,
) -> Ortho<T> {
    let m = cols.len();
    let mut q: Vec<DVector<T>> = Vec::with_capacity(m);
    let mut r = DMatrix::<T>::zeros(m, m);
    for (j, col) in cols.iter().enumerate() {
        let mut w = col.clone();
        for pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let h = qi.dotc(&w);
                w -= qi * h.clone();
                if pass == 0 {
                    r[(i, j)] = h;
                } else {
                    r[(i, j)] += h;
                }
            }
        }
        let nw = w.norm();
        if nw <= drop_tol {
            return Ortho { q, r, rank: j };
        }
        r[(j, j)] = T::from_real(nw);
        q.push(w / T::from_real(nw));
    }
    Ortho { q, r, rank: m }
}

/// Drop tolerance used for numerical-rank decisions on a set of columns:
/// `n * eps * max_column_norm`, following the usual rank-revealing
/// convention. `override_tol`, when given, replaces the `n * eps` factor.
pub(crate) fn rank_drop_tol<T: ComplexField<RealField = f64>>(
    cols: &[DVector<T>],
    override_tol: Option<f64>,
) -> f64 {
    let max_norm = cols.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let n = cols.first().map_or(0, |c| c.len());
    let factor = override_tol.unwrap_or(n as f64 * tol::RANK_TOL_FACTOR);
    factor * max_norm
}

/// Singular value decomposition with the singular values (and the
/// associated vectors) sorted in descending order.
pub(crate) struct SortedSvd {
    pub sigmas: Vec<f64>,
    /// Left singular vectors as columns.
    pub u: DMatrix<f64>,
    /// Right singular vectors as columns.
    pub v: DMatrix<f64>,
}

pub(crate) fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let sigmas: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = DMatrix::from_fn(u.nrows(), idx.len(), |r, c| u[(r, idx[c])]);
    let v_sorted = DMatrix::from_fn(v_t.ncols(), idx.len(), |r, c| v_t[(idx[c], r)]);
    SortedSvd {
        sigmas,
        u: u_sorted,
        v: v_sorted,
    }
}

/// Random unit vector from a seeded generator.
pub(crate) fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Deterministic sign convention: scale so the component of largest
/// magnitude is positive. Vectors with no component above `1e-14` are
/// returned unchanged.
pub(crate) fn sign_normalize(v: &DVector<f64>) -> DVector<f64> {
    let mut idx = 0;
    let mut max = 0.0_f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > max {
            max = x.abs();
            idx = i;
        }
    }
    if max > 1e-14 && v[idx] < 0.0 {
        -v.clone()
    } else {
        v.clone()
    }
}

/// Minimum-norm point in the convex hull of the rows of `g`, computed by
/// an active-set method on the simplex-constrained quadratic program.
/// Returns the combination weights and the hull point.
pub(crate) fn min_norm_in_hull(g: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let (lam, _) = simplex_qp(&DVector::zeros(g.nrows()), g, 1.0);
    let point = g.transpose() * &lam;
    (lam, point)
}

/// Maximize `e . lam - t/2 ||G^T lam||^2` over the probability simplex.
///
/// Used both for the proximal-bundle dual subproblem and (with `e = 0`)
/// for minimum-norm subgradient computations. Active-set iteration on the
/// KKT system; bundles here stay small so the cost is negligible.
pub(crate) fn simplex_qp(e: &DVector<f64>, g: &DMatrix<f64>, t: f64) -> (DVector<f64>, f64) {
    let m = e.len();
    assert_eq!(g.nrows(), m);
    if m == 1 {
        return (DVector::from_element(1, 1.0), e[0] - 0.5 * t * g.row(0).norm_squared());
    }
    let q = g * g.transpose() * t;
    let mut active: Vec<usize> = vec![e.imax()];
    let mut lam = DVector::zeros(m);
    lam[active[0]] = 1.0;

    let objective = |lam: &DVector<f64>| e.dot(lam) - 0.5 * lam.dot(&(&q * lam));

    for _ in 0..200 {
        // Solve the equality-constrained problem on the active set.
        let s = active.len();
        let mut kkt = DMatrix::zeros(s + 1, s + 1);
        for (ii, &i) in active.iter().enumerate() {
            for (jj, &j) in active.iter().enumerate() {
                kkt[(ii, jj)] = q[(i, j)];
            }
            kkt[(ii, s)] = 1.0;
            kkt[(s, ii)] = 1.0;
        }
        let mut rhs = DVector::zeros(s + 1);
        for (ii, &i) in active.iter().enumerate() {
            rhs[ii] = e[i];
        }
        rhs[s] = 1.0;
        let sol = match kkt.clone().lu().solve(&rhs) {
            Some(x) => x,
            None => kkt
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(s + 1)),
        };
        let lam_active = sol.rows(0, s).into_owned();

        if lam_active.iter().all(|&x| x >= -1e-14) {
            let mut lam_new = DVector::zeros(m);
            for (ii, &i) in active.iter().enumerate() {
                lam_new[i] = lam_active[ii].max(0.0);
            }
            lam = lam_new;
            // Optimality check: gradient must not exceed the active value.
            let grad = e - &q * &lam;
            let mu = active
                .iter()
                .map(|&i| grad[i])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut worst = mu;
            let mut worst_i = None;
            for i in 0..m {
                if !active.contains(&i) && grad[i] > worst + 1e-12 * (1.0 + mu.abs()) {
                    worst = grad[i];
                    worst_i = Some(i);
                }
            }
            match worst_i {
                None => break,
                Some(i) => active.push(i),
            }
        } else {
            // Step from the current point toward the subproblem solution
            // until the first weight hits zero; drop it.
            let cur: Vec<f64> = active.iter().map(|&i| lam[i]).collect();
            let mut alpha = 1.0_f64;
            for (ii, &la) in lam_active.iter().enumerate() {
                let d = la - cur[ii];
                if d < -1e-18 {
                    alpha = alpha.min(cur[ii] / -d);
                }
            }
            let mut lam_new = DVector::zeros(m);
            for (ii, &i) in active.iter().enumerate() {
                lam_new[i] = (cur[ii] + alpha * (lam_active[ii] - cur[ii])).max(0.0);
            }
            lam = lam_new;
            active.retain(|&i| lam[i] > 1e-15);
            if active.is_empty() {
                let i = e.imax();
                active.push(i);
                lam = DVector::zeros(m);
                lam[i] = 1.0;
            }
        }
    }
    let val = objective(&lam);
    (lam, val)
}
