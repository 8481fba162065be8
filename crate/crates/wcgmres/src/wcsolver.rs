//! Worst-case GMRES: maximize the step-`k` residual norm over unit
//! initial vectors.
//!
//! The objective `G(v) = ||p(A; gamma(v)) v||^2 / ||v||^2` is smooth away
//! from the degenerate set, scale invariant, and carries an analytic
//! gradient from the Rayleigh-quotient form: at the inner minimizer the
//! coefficient gradient vanishes and
//! `grad G(v) = (2/||v||^2) (p(A)^T p(A) v - G v)`.
//! Each start is refined by projected gradient ascent on the sphere
//! (tangential step, renormalize, Armijo backtracking), accelerated by an
//! eigenvector polish: near a maximizer the witness is an eigenvector of
//! `p(A)^T p(A)`, so the closest eigenvector of the current iterate's
//! residual matrix is tried whenever it reduces the gradient norm.
//!
//! The returned value is a lower bound on the true maximum by
//! construction; the certificates measure local stationarity only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::crossiter::{cross_iterations_2, satisfies_cross_equality};
use crate::error::{Error, Result};
use crate::krylov::{gmres_core, gmres_residual, min_poly_degree, PolyCoeffs};
use crate::linalg::{power_columns, random_unit_vector, sign_normalize, sorted_svd};
use crate::matgen::toh_flip_matrix;
use crate::tol;

/// Multi-start configuration for [`solve_worst_case`].
#[derive(Debug, Clone)]
pub struct WcConfig {
    pub n_random_starts: usize,
    pub n_cross_starts: usize,
    /// Algorithm-2 sweeps used to produce each cross-iteration warm start.
    pub cross_sweeps: usize,
    /// Tangential-gradient norm at which an ascent counts as certified.
    pub ascent_tol: f64,
    pub max_ascent_iters: usize,
    pub seed: u64,
    /// Worker threads for the embarrassingly parallel starts; results are
    /// merged in start-index order, so the outcome does not depend on
    /// scheduling.
    pub threads: usize,
    /// Additional user-supplied starts, tried after the built-in ones.
    pub extra_starts: Vec<DVector<f64>>,
}

impl WcConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n_random_starts: 16,
            n_cross_starts: 4,
            cross_sweeps: 25,
            ascent_tol: tol::ASCENT_TOL,
            max_ascent_iters: 600,
            seed,
            threads: 1,
            extra_starts: Vec::new(),
        }
    }

    pub fn with_starts(mut self, n_random: usize) -> Self {
        self.n_random_starts = n_random;
        self
    }

    pub fn with_extra_starts(mut self, extra: Vec<DVector<f64>>) -> Self {
        self.extra_starts = extra;
        self
    }
}

impl Default for WcConfig {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Which kind of start produced the best refined point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartKind {
    CrossIter,
    Random,
    User,
}

/// A certified local solution of the worst-case problem.
#[derive(Debug, Clone)]
pub struct WorstCaseSolution {
    /// Attained value `sqrt(max G)`; a lower bound on the true maximum.
    pub psi: f64,
    pub witness: DVector<f64>,
    pub coeffs: PolyCoeffs,
    /// `||grad_c F|| = 2 ||K(b)^T r||` at the solution.
    pub grad_c_norm: f64,
    /// `||grad_v F|| = 2 ||p(A)^T p(A) b - psi^2 b||` at the solution.
    pub grad_v_norm: f64,
    /// `||p(A)^T p(A) b - psi^2 b||`.
    pub singvec_residual: f64,
    pub starts_used: usize,
    pub best_start_kind: StartKind,
    /// Set when `k >= d(A)` and the maximum is trivially zero.
    pub degenerate: bool,
    /// Whether the winning ascent met `ascent_tol`; a `false` here is the
    /// failure-to-certify warning, not an error.
    pub converged: bool,
}

/// `f(c, v) = ||p(A; c) v||^2 = ||v - K(v) c||^2`.
pub fn eval_f(a: &DMatrix<f64>, c: &PolyCoeffs, v: &DVector<f64>) -> f64 {
    c.apply(a, v).norm_squared()
}

/// `G(v) = g(v/||v||)` together with its analytic gradient
/// `(2/||v||^2)(p(A)^T p(A) v - G v)` at `c = gamma(v)`.
///
/// The gradient is tangential: `<grad, v> = 0` up to rounding.
pub fn eval_g_and_grad(
    a: &DMatrix<f64>,
    v: &DVector<f64>,
    k: usize,
) -> Result<(f64, DVector<f64>)> {
    let core = gmres_core(a, v, k, None)?;
    if core.rank < k {
        return Err(Error::DegenerateVector { rank: core.rank, k });
    }
    let at = a.transpose();
    let vv = v.norm_squared();
    let g = core.residual_norm * core.residual_norm / vv;
    // p(A)^T p(A) v = p(A^T) r
    let mut pt_r = core.residual.clone();
    let mut w = core.residual.clone();
    for &cj in core.coeffs.iter() {
        w = &at * &w;
        pt_r -= &w * cj;
    }
    let grad = (pt_r - v * g) * (2.0 / vv);
    Ok((g, grad))
}

struct AscentOutcome {
    witness: DVector<f64>,
    g_value: f64,
    converged: bool,
}

/// Projected gradient ascent on the sphere with Armijo backtracking and
/// the eigenvector polish. `v0` need not be unit.
fn ascend(
    a: &DMatrix<f64>,
    powers: &[DMatrix<f64>],
    k: usize,
    v0: &DVector<f64>,
    ascent_tol: f64,
    max_iters: usize,
    rng: &mut ChaCha20Rng,
) -> Option<AscentOutcome> {
    let n = a.nrows();
    let mut v = v0.clone();
    if v.norm() == 0.0 {
        return None;
    }
    v /= v.norm();

    // degenerate starts: perturb once, then give up
    let mut state = match eval_g_and_grad(a, &v, k) {
        Ok(s) => s,
        Err(_) => {
            let noise = DVector::from_fn(n, |_, _| {
                rng.sample::<f64, _>(rand_distr::StandardNormal)
            });
            v += noise * 1e-8;
            v /= v.norm();
            match eval_g_and_grad(a, &v, k) {
                Ok(s) => s,
                Err(_) => return None,
            }
        }
    };

    let mut step = 1.0_f64;
    let mut converged = false;
    for _ in 0..max_iters {
        let gn = state.1.norm();
        if gn <= ascent_tol {
            converged = true;
            break;
        }

        let mut improved = false;
        while step > 1e-18 {
            let mut vt = &v + &state.1 * step;
            vt /= vt.norm();
            if let Ok((gt, gradt)) = eval_g_and_grad(a, &vt, k) {
                if gt >= state.0 + 1e-4 * step * gn * gn {
                    v = vt;
                    state = (gt, gradt);
                    step = (step * 1.8).min(1e3);
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }

        // Eigenvector polish on p(A)^T p(A) at the current coefficients.
        if let Ok(core) = gmres_core(a, &v, k, None) {
            if core.rank == k {
                let mut p = DMatrix::identity(n, n);
                for (j, pw) in powers.iter().take(k).enumerate() {
                    p -= pw * core.coeffs[j];
                }
                let m = p.transpose() * &p;
                let eig = SymmetricEigen::new(m);
                let mut best_col = 0;
                let mut best_overlap = -1.0;
                for c in 0..n {
                    let overlap = eig.eigenvectors.column(c).dot(&v).abs();
                    if overlap > best_overlap {
                        best_overlap = overlap;
                        best_col = c;
                    }
                }
                let mut u: DVector<f64> = eig.eigenvectors.column(best_col).into_owned();
                if u.dot(&v) < 0.0 {
                    u = -u;
                }
                if let Ok((gu, gradu)) = eval_g_and_grad(a, &u, k) {
                    // never trade away objective value: the eigenvector of
                    // p^T p nearest to v can be a different (lower)
                    // stationary point, e.g. an eigenvector of A itself
                    let no_collapse = gu >= state.0 - 1e-12 * state.0.abs();
                    if (gradu.norm() < state.1.norm() && no_collapse) || gu > state.0 {
                        v = u;
                        state = (gu, gradu);
                        improved = true;
                    }
                }
            }
        }

        if !improved {
            converged = state.1.norm() <= ascent_tol;
            break;
        }
    }

    // Second-order polish once the first-order methods are near a
    // stationary point: gradient ascent floors around 1e-8 because Armijo
    // can no longer resolve objective differences of order gn^2.
    if state.1.norm() <= 1e-2 {
        newton_polish(a, k, &mut v, &mut state);
        converged = state.1.norm() <= ascent_tol;
    }

    Some(AscentOutcome {
        witness: v,
        g_value: state.0,
        converged: converged || state.1.norm() <= ascent_tol,
    })
}

/// Riemannian Newton refinement of a near-stationary point of `G` on the
/// sphere. The tangent-space Hessian is assembled by central differences
/// of the analytic gradient; steps are accepted only when they shrink the
/// gradient norm without collapsing the objective, so the method stays on
/// the local maximizer the ascent delivered.
fn newton_polish(
    a: &DMatrix<f64>,
    k: usize,
    v: &mut DVector<f64>,
    state: &mut (f64, DVector<f64>),
) {
    let n = a.nrows();
    let h = 1e-5;
    for _ in 0..15 {
        let gn = state.1.norm();
        if gn <= 1e-13 {
            break;
        }
        // tangent basis at v
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
        for i in 0..n {
            let mut w = DVector::zeros(n);
            w[i] = 1.0;
            w -= &*v * v[i];
            for t in &basis {
                let d = t.dot(&w);
                w -= t * d;
            }
            if w.norm() > 1e-8 {
                basis.push(&w / w.norm());
            }
        }
        let m = basis.len();
        if m == 0 {
            break;
        }
        let mut hess = DMatrix::zeros(m, m);
        let mut ok = true;
        for (j, t) in basis.iter().enumerate() {
            let mut wp = &*v + t * h;
            wp /= wp.norm();
            let mut wm = &*v - t * h;
            wm /= wm.norm();
            match (eval_g_and_grad(a, &wp, k), eval_g_and_grad(a, &wm, k)) {
                (Ok((_, gp)), Ok((_, gm))) => {
                    let d = (gp - gm) / (2.0 * h);
                    for (i, ti) in basis.iter().enumerate() {
                        hess[(i, j)] = ti.dot(&d);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let hess = (hess.transpose() + &hess) * 0.5;
        let mut rhs = DVector::zeros(m);
        for (i, t) in basis.iter().enumerate() {
            rhs[i] = -t.dot(&state.1);
        }
        let mut s = match hess.lu().solve(&rhs) {
            Some(s) => s,
            None => break,
        };
        if s.norm() > 0.5 {
            s *= 0.5 / s.norm();
        }
        let mut accepted = false;
        for _ in 0..8 {
            let mut vn = v.clone();
            for (i, t) in basis.iter().enumerate() {
                vn += t * s[i];
            }
            vn /= vn.norm();
            if let Ok((gvn, gradn)) = eval_g_and_grad(a, &vn, k) {
                if gradn.norm() < gn && gvn > state.0 - 1e-6 * state.0.abs() {
                    *v = vn;
                    *state = (gvn, gradn);
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
    }
}

fn check_nonsingular(a: &DMatrix<f64>) -> Result<()> {
    let svd = a.clone().svd(false, false);
    let max = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    let min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min <= a.nrows() as f64 * f64::EPSILON * max {
        return Err(Error::SingularOperator);
    }
    Ok(())
}

/// Build the start list for a solve: cross-iteration warm starts first,
/// then seeded random vectors, then user extras.
fn build_starts(a: &DMatrix<f64>, k: usize, cfg: &WcConfig) -> Vec<(StartKind, DVector<f64>)> {
    let n = a.nrows();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut starts = Vec::new();
    for _ in 0..cfg.n_cross_starts {
        let b0 = random_unit_vector(n, &mut rng);
        match cross_iterations_2(a, &b0, k, tol::CROSS_TOL, cfg.cross_sweeps) {
            Ok(trace) => starts.push((StartKind::CrossIter, trace.final_vector)),
            Err(_) => starts.push((StartKind::CrossIter, b0)),
        }
    }
    for _ in 0..cfg.n_random_starts {
        starts.push((StartKind::Random, random_unit_vector(n, &mut rng)));
    }
    for v in &cfg.extra_starts {
        if v.len() == n && v.norm() > 0.0 {
            starts.push((StartKind::User, v / v.norm()));
        }
    }
    starts
}

/// Multi-start maximization of `G` on the unit sphere. The result is the
/// best refined point with its stationarity certificates; `psi` is a
/// lower bound on the worst-case value by construction.
pub fn solve_worst_case(a: &DMatrix<f64>, k: usize, cfg: &WcConfig) -> Result<WorstCaseSolution> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, max: n });
    }
    check_nonsingular(a)?;

    let d = min_poly_degree(a, None)?;
    if k >= d {
        // GMRES terminates for every start: the maximum is zero.
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        let witness = sign_normalize(&random_unit_vector(n, &mut rng));
        let core = gmres_core(a, &witness, k, None)?;
        return Ok(WorstCaseSolution {
            psi: 0.0,
            witness,
            coeffs: PolyCoeffs::new(core.coeffs),
            grad_c_norm: 0.0,
            grad_v_norm: 0.0,
            singvec_residual: 0.0,
            starts_used: 0,
            best_start_kind: StartKind::Random,
            degenerate: true,
            converged: true,
        });
    }

    let powers = crate::linalg::matrix_powers(a, k);
    let starts = build_starts(a, k, cfg);
    let run_one = |idx: usize, v0: &DVector<f64>| {
        let mut rng =
            ChaCha20Rng::seed_from_u64(cfg.seed ^ (0x517c_c1b7_2722_0a95 + idx as u64));
        ascend(a, &powers, k, v0, cfg.ascent_tol, cfg.max_ascent_iters, &mut rng)
    };
    let outcomes: Vec<Option<AscentOutcome>> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::CertificationFailure(format!("thread pool: {e}")))?;
        use rayon::prelude::*;
        pool.install(|| {
            starts
                .par_iter()
                .enumerate()
                .map(|(i, (_, v0))| run_one(i, v0))
                .collect()
        })
    } else {
        starts
            .iter()
            .enumerate()
            .map(|(i, (_, v0))| run_one(i, v0))
            .collect()
    };

    // Merge in start-index order; a strictly larger value wins.
    let mut best: Option<(usize, &AscentOutcome)> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if let Some(o) = o {
            let better = match best {
                None => true,
                Some((_, b)) => o.g_value > b.g_value,
            };
            if better {
                best = Some((i, o));
            }
        }
    }
    let (best_idx, best) = best.ok_or_else(|| {
        Error::CertificationFailure("no start produced a nondegenerate ascent".into())
    })?;
    let best_kind = starts[best_idx].0;

    let witness = sign_normalize(&best.witness);
    let core = gmres_core(a, &witness, k, None)?;
    let psi = core.residual_norm;
    let coeffs = PolyCoeffs::new(core.coeffs.clone());

    // Certificates at the witness.
    let cols = power_columns(a, &witness, k, false);
    let mut ktr = DVector::zeros(k);
    for (j, col) in cols.iter().enumerate() {
        ktr[j] = col.dot(&core.residual);
    }
    let grad_c_norm = 2.0 * ktr.norm();
    let at = a.transpose();
    let mut pt_r = core.residual.clone();
    let mut w = core.residual.clone();
    for &cj in core.coeffs.iter() {
        w = &at * &w;
        pt_r -= &w * cj;
    }
    let singvec_residual = (&pt_r - &witness * (psi * psi)).norm();

    Ok(WorstCaseSolution {
        psi,
        witness,
        coeffs,
        grad_c_norm,
        grad_v_norm: 2.0 * singvec_residual,
        singvec_residual,
        starts_used: starts.len(),
        best_start_kind: best_kind,
        degenerate: false,
        converged: best.converged,
    })
}

/// Per-item certificate recomputation for a worst-case solution.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    /// `||p(A)^T p(A) b - psi^2 b||` and whether it meets the bound.
    pub singvec_residual: f64,
    pub singvec_pass: bool,
    /// Cross-equality membership defect of the witness.
    pub cross_equality_defect: f64,
    pub cross_equality_pass: bool,
    /// One `A`-sweep then one `A^T`-sweep: `||s_k|| = ||r_k|| = psi` and
    /// the sweep reproduces the witness.
    pub sweep_r_norm: f64,
    pub sweep_s_norm: f64,
    pub sweep_vector_dev: f64,
    pub chain_pass: bool,
    /// `|psi(A) - psi(A^T)|` from a fresh transpose solve.
    pub transpose_gap: f64,
    pub transpose_pass: bool,
    /// 1-based index (descending order) of the singular value of
    /// `p(A; c)` the witness pairs with, and the pairing quality.
    pub singular_index: usize,
    pub singular_value: f64,
    pub singular_alignment: f64,
    pub sigmas: Vec<f64>,
    pub pass: bool,
}

/// Recompute every certificate of `sol` from scratch: the singular-vector
/// identity, the cross equality of the witness, the two-sweep norm chain,
/// a transpose re-solve, and the singular-value index of the witness.
pub fn certify_worst_case(
    a: &DMatrix<f64>,
    sol: &WorstCaseSolution,
    k: usize,
    cfg: &WcConfig,
    cert_tol: f64,
) -> Result<CertificateReport> {
    let b = &sol.witness / sol.witness.norm();
    let r = gmres_residual(a, &b, k)?;
    let psi = sol.psi;

    // (a) singular-vector identity
    let at = a.transpose();
    let mut pt_r = r.residual.clone();
    let mut w = r.residual.clone();
    for &cj in r.coeffs.as_slice() {
        w = &at * &w;
        pt_r -= &w * cj;
    }
    let singvec_residual = (&pt_r - &b * (psi * psi)).norm();
    let singvec_pass = singvec_residual <= cert_tol.max(tol::SINGVEC_REL_TOL * psi * psi);

    // (b) cross equality of the witness
    let ce = satisfies_cross_equality(a, &b, k, cert_tol.max(1e-8))?;

    // (c) theorem chain: ||s|| = ||r|| = psi and s/psi reproduces b
    let s = gmres_residual(&at, &(&r.residual / r.residual_norm), k)?;
    let sweep_vector_dev = (&s.residual / s.residual_norm - &b).norm();
    let chain_dev = (s.residual_norm - r.residual_norm)
        .abs()
        .max((r.residual_norm - psi).abs());
    let chain_pass = chain_dev <= cert_tol.max(1e-10) && sweep_vector_dev <= 1e-6;

    // (d) transpose consistency
    let sol_t = solve_worst_case(&at, k, cfg)?;
    let transpose_gap = (sol_t.psi - psi).abs();
    let transpose_pass = transpose_gap <= 1e-6;

    // (e) singular-value index of the witness, paired by overlap
    let p = r.coeffs.matrix(a);
    let svd = sorted_svd(&p);
    let mut singular_index = 0;
    let mut singular_alignment = -1.0;
    for i in 0..svd.sigmas.len() {
        let overlap = svd.v.column(i).dot(&b).abs();
        if overlap > singular_alignment {
            singular_alignment = overlap;
            singular_index = i;
        }
    }

    let pass = singvec_pass && ce.satisfied && chain_pass && transpose_pass;
    Ok(CertificateReport {
        singvec_residual,
        singvec_pass,
        cross_equality_defect: ce.membership_defect,
        cross_equality_pass: ce.satisfied,
        sweep_r_norm: r.residual_norm,
        sweep_s_norm: s.residual_norm,
        sweep_vector_dev,
        chain_pass,
        transpose_gap,
        transpose_pass,
        singular_index: singular_index + 1,
        singular_value: svd.sigmas[singular_index],
        singular_alignment,
        sigmas: svd.sigmas,
        pass,
    })
}

/// The partner solution on the Toh family: if `p(z)` is worst case then so
/// is `p(-z)`, with witness `Q^T u` where `u` is the left singular vector
/// paired with the original witness. Errors when the input does not
/// certify at the worst-case value.
pub fn toh_conjugate_solution(
    a: &DMatrix<f64>,
    sol: &WorstCaseSolution,
) -> Result<WorstCaseSolution> {
    if a.nrows() != 4 || a.ncols() != 4 {
        return Err(Error::DimensionMismatch(
            "conjugate construction needs the 4x4 Toh matrix".into(),
        ));
    }
    let q = toh_flip_matrix();
    let flip_dev = (-(&q * a.transpose() * q.transpose()) - a).norm();
    if flip_dev > 1e-10 * a.norm() {
        return Err(Error::ParamOutOfRange(
            "matrix does not satisfy the Toh flip similarity".into(),
        ));
    }
    let k = sol.coeffs.k();
    let b = &sol.witness / sol.witness.norm();
    let pb = sol.coeffs.apply(a, &b);
    if (pb.norm() - sol.psi).abs() > 1e-8 * (1.0 + sol.psi) {
        return Err(Error::CertificationFailure(format!(
            "input solution is not at its claimed value: ||p(A)b|| = {}, psi = {}",
            pb.norm(),
            sol.psi
        )));
    }
    // left singular vector paired with the witness, mapped through Q^T
    let u = &pb / pb.norm();
    let witness = sign_normalize(&(q.transpose() * u));

    let r = gmres_residual(a, &witness, k)?;
    if (r.residual_norm - sol.psi).abs() > 1e-8 * (1.0 + sol.psi) {
        return Err(Error::CertificationFailure(format!(
            "conjugate witness attains {} instead of {}",
            r.residual_norm, sol.psi
        )));
    }
    let predicted = sol.coeffs.conjugate_z();
    let coeff_dev = (DVector::from_column_slice(r.coeffs.as_slice())
        - DVector::from_column_slice(predicted.as_slice()))
    .norm();
    if coeff_dev > 1e-6 * (1.0 + sol.coeffs.coeffs().norm()) {
        return Err(Error::CertificationFailure(format!(
            "conjugate polynomial deviates from the odd-power sign flip by {coeff_dev}"
        )));
    }

    let at = a.transpose();
    let mut pt_r = r.residual.clone();
    let mut w = r.residual.clone();
    for &cj in r.coeffs.as_slice() {
        w = &at * &w;
        pt_r -= &w * cj;
    }
    let psi = r.residual_norm;
    let singvec_residual = (&pt_r - &witness * (psi * psi)).norm();
    let cols = power_columns(a, &witness, k, false);
    let mut ktr = DVector::zeros(k);
    for (j, col) in cols.iter().enumerate() {
        ktr[j] = col.dot(&r.residual);
    }

    Ok(WorstCaseSolution {
        psi,
        witness,
        coeffs: r.coeffs,
        grad_c_norm: 2.0 * ktr.norm(),
        grad_v_norm: 2.0 * singvec_residual,
        singvec_residual,
        starts_used: sol.starts_used,
        best_start_kind: StartKind::User,
        degenerate: false,
        converged: sol.converged,
    })
}

/// `|psi_k(A) - psi_k(A^T)|` from two independent solves; a consistency
/// diagnostic expected at solver tolerance.
pub fn psi_transpose_gap(a: &DMatrix<f64>, k: usize, cfg: &WcConfig) -> Result<f64> {
    let s1 = solve_worst_case(a, k, cfg)?;
    let s2 = solve_worst_case(&a.transpose(), k, cfg)?;
    Ok((s1.psi - s2.psi).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{gen_toh, TohParams};
    use approx::assert_relative_eq;

    #[test]
    fn eval_f_basics() {
        let a = DMatrix::from_partial_diagonal(2, 2, &[1.0, 2.0]);
        let v = DVector::from_vec(vec![1.0, 0.0]);
        assert_relative_eq!(eval_f(&a, &PolyCoeffs::zeros(1), &v), 1.0, epsilon = 1e-15);
        // p(1) = 0 kills the eigenvector
        assert!(eval_f(&a, &PolyCoeffs::from_slice(&[1.0]), &v) < 1e-30);
        // c = gamma(v) reproduces the GMRES value
        let b = DVector::from_vec(vec![0.6, 0.8]);
        let r = gmres_residual(&a, &b, 1).unwrap();
        assert_relative_eq!(
            eval_f(&a, &r.coeffs, &b),
            r.residual_norm * r.residual_norm,
            max_relative = 1e-12
        );
    }

    #[test]
    fn gradient_is_tangential_and_scale_invariant() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let v = DVector::from_vec(vec![0.4, -0.2, 0.7, 0.1]);
        let (g, grad) = eval_g_and_grad(&a, &v, 3).unwrap();
        assert!(grad.dot(&v).abs() < 1e-10 * grad.norm().max(1.0));
        let (g2, _) = eval_g_and_grad(&a, &(&v * 3.7), 3).unwrap();
        assert_relative_eq!(g, g2, max_relative = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let v = DVector::from_vec(vec![0.4, -0.2, 0.7, 0.1]).normalize();
        let (_, grad) = eval_g_and_grad(&a, &v, 2).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let mut vp = v.clone();
            vp[i] += h;
            let mut vm = v.clone();
            vm[i] -= h;
            let (gp, _) = eval_g_and_grad(&a, &vp, 2).unwrap();
            let (gm, _) = eval_g_and_grad(&a, &vm, 2).unwrap();
            let fd = (gp - gm) / (2.0 * h);
            assert_relative_eq!(grad[i], fd, max_relative = 1e-5, epsilon = 1e-9);
        }
    }

    #[test]
    fn normal_matrix_k1_value() {
        // brute-force oracle pins psi = 0.5 with p(z) = 1 - z/2 for diag(1,2,3)
        let a = DMatrix::from_partial_diagonal(3, 3, &[1.0, 2.0, 3.0]);
        let sol = solve_worst_case(&a, 1, &WcConfig::new(7)).unwrap();
        assert_relative_eq!(sol.psi, 0.5, epsilon = 1e-8);
        assert_relative_eq!(sol.coeffs.as_slice()[0], 0.5, epsilon = 1e-6);
        assert!(sol.converged);
        assert!(sol.singvec_residual < 1e-8);
    }

    #[test]
    fn beyond_minimal_degree_is_degenerate_zero() {
        let a = DMatrix::from_partial_diagonal(3, 3, &[1.0, 1.0, 2.0]);
        // d(A) = 2, so k = 2 already terminates everywhere
        let sol = solve_worst_case(&a, 2, &WcConfig::new(1)).unwrap();
        assert_eq!(sol.psi, 0.0);
        assert!(sol.degenerate);
    }

    #[test]
    fn toh_worst_case_smoke() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let mut cfg = WcConfig::new(3);
        cfg.n_random_starts = 8;
        cfg.n_cross_starts = 2;
        let sol = solve_worst_case(&a, 3, &cfg).unwrap();
        assert!((sol.psi - 0.4579).abs() < 1e-3, "psi = {}", sol.psi);
        assert!(sol.grad_v_norm < 1e-8, "grad_v = {}", sol.grad_v_norm);
    }

    #[test]
    fn certificates_reject_a_fake_solution() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let b = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        let r = gmres_residual(&a, &b, 3).unwrap();
        let fake = WorstCaseSolution {
            psi: r.residual_norm,
            witness: b,
            coeffs: r.coeffs,
            grad_c_norm: 0.0,
            grad_v_norm: 0.0,
            singvec_residual: 0.0,
            starts_used: 0,
            best_start_kind: StartKind::User,
            degenerate: false,
            converged: true,
        };
        let report = certify_worst_case(&a, &fake, 3, &WcConfig::new(2), 1e-8).unwrap();
        assert!(!report.pass);
        assert!(!report.singvec_pass);
        assert!(report.singvec_residual > 1e-3);
    }

    #[test]
    fn transpose_gap_vanishes_for_symmetric() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 4.0]);
        let gap = psi_transpose_gap(&a, 2, &WcConfig::new(5)).unwrap();
        assert!(gap < 1e-10, "gap = {gap}");
    }
}
