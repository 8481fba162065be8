//! Ideal GMRES: minimize the spectral norm `||p(A; c)||` over the
//! normalized polynomial class, and decide whether the worst-case and
//! ideal values coincide.
//!
//! `h(c) = sigma_max(p(A; c))` is convex and nonsmooth exactly where the
//! top singular value is multiple, which is the generic situation at the
//! minimizer. The solver runs a proximal bundle method (cuts from every
//! top singular pair, dual subproblem solved exactly on the simplex) and
//! finishes with line minimizations along coordinate, random, and
//! steepest-descent directions. Line minimization brackets the sign
//! change of the directional derivative, which is available analytically
//! from the top singular block, so the final coefficients are resolved to
//! near machine precision rather than to the square root of the function
//! tolerance.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::krylov::{gmres_residual, min_poly_degree, PolyCoeffs};
use crate::linalg::{
    matrix_powers, mgs, min_norm_in_hull, power_columns, random_unit_vector, rank_drop_tol,
    simplex_qp, sorted_svd,
};
use crate::tol;
use crate::wcsolver::{solve_worst_case, WcConfig};

/// Configuration for [`solve_ideal`].
#[derive(Debug, Clone)]
pub struct IdealConfig {
    /// Relative predicted-decrease tolerance for the bundle phase.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Post-bundle polish sweeps (coordinate + subgradient directions).
    pub polish_sweeps: usize,
}

impl IdealConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            tol: tol::IDEAL_TOL,
            max_iters: tol::IDEAL_MAX_ITERS,
            seed,
            polish_sweeps: 40,
        }
    }
}

impl Default for IdealConfig {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Solution of the ideal GMRES problem.
#[derive(Debug, Clone)]
pub struct IdealSolution {
    pub phi: f64,
    pub coeffs: PolyCoeffs,
    /// `sigma_1 - sigma_2` of `p(A; c*)`.
    pub sigma_gap: f64,
    /// Norm of the minimum-norm convex combination of the top singular
    /// pair subgradients at `c*`.
    pub subgrad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Full SVD data of `p(A; c)` with a multiplicity estimate of the top
/// singular value (relative gap below 1e-8 merges values).
#[derive(Debug, Clone)]
pub struct SpectralNormEval {
    pub value: f64,
    pub sigmas: Vec<f64>,
    /// Top-group right singular vectors as columns (n x multiplicity).
    pub right: DMatrix<f64>,
    /// Top-group left singular vectors as columns.
    pub left: DMatrix<f64>,
    pub multiplicity: usize,
}

/// SVD of the residual matrix `p(A; c)`.
pub fn eval_spectral_norm_poly(a: &DMatrix<f64>, c: &PolyCoeffs) -> SpectralNormEval {
    let p = c.matrix(a);
    let svd = sorted_svd(&p);
    let value = svd.sigmas[0];
    let multiplicity = svd
        .sigmas
        .iter()
        .take_while(|&&s| s >= value * (1.0 - tol::SIGMA_MULTIPLICITY_REL))
        .count();
    let n = a.nrows();
    let right = DMatrix::from_fn(n, multiplicity, |r, j| svd.v[(r, j)]);
    let left = DMatrix::from_fn(n, multiplicity, |r, j| svd.u[(r, j)]);
    SpectralNormEval {
        value,
        sigmas: svd.sigmas,
        right,
        left,
        multiplicity,
    }
}

fn poly_matrix(powers: &[DMatrix<f64>], c: &DVector<f64>) -> DMatrix<f64> {
    let n = powers[0].nrows();
    let mut p = DMatrix::identity(n, n);
    for (j, pw) in powers.iter().take(c.len()).enumerate() {
        p -= pw * c[j];
    }
    p
}

/// Objective value plus one cut per top singular pair: the subgradient of
/// `sigma_max` through pair `(u_i, v_i)` has components `-u_i^T A^j v_i`.
fn value_and_cuts(
    powers: &[DMatrix<f64>],
    c: &DVector<f64>,
    mult_tol: f64,
) -> (f64, Vec<DVector<f64>>, Vec<f64>) {
    let p = poly_matrix(powers, c);
    let svd = sorted_svd(&p);
    let h = svd.sigmas[0];
    let m = svd
        .sigmas
        .iter()
        .take_while(|&&s| s >= h * (1.0 - mult_tol))
        .count();
    let k = c.len();
    let mut cuts = Vec::with_capacity(m);
    for i in 0..m {
        let u = svd.u.column(i);
        let v = svd.v.column(i);
        let mut g = DVector::zeros(k);
        for (j, pw) in powers.iter().take(k).enumerate() {
            g[j] = -(u.dot(&(pw * v)));
        }
        cuts.push(g);
    }
    (h, cuts, svd.sigmas)
}

/// Right directional derivative of `h` at `c` along unit `d`: the largest
/// eigenvalue of the symmetrized top block of `U_g^T D V_g` with
/// `D = -sum d_j A^j`.
fn dir_deriv(powers: &[DMatrix<f64>], c: &DVector<f64>, d: &DVector<f64>) -> f64 {
    let p = poly_matrix(powers, c);
    let svd = sorted_svd(&p);
    let h = svd.sigmas[0];
    let m = svd
        .sigmas
        .iter()
        .take_while(|&&s| s >= h * (1.0 - tol::SIGMA_MULTIPLICITY_REL))
        .count();
    let n = powers[0].nrows();
    let mut dmat = DMatrix::<f64>::zeros(n, n);
    for (j, pw) in powers.iter().take(d.len()).enumerate() {
        dmat -= pw * d[j];
    }
    let mut block = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            block[(i, j)] = svd.u.column(i).dot(&(&dmat * svd.v.column(j)));
        }
    }
    let sym = (block.transpose() + &block) * 0.5;
    nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exact line minimization of the convex `t -> h(c + t d)` by bisecting
/// the sign change of the directional derivative.
fn line_min(powers: &[DMatrix<f64>], c: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
    let dn = d.norm();
    if dn == 0.0 {
        return c.clone();
    }
    let mut d = d / dn;
    let mut f0 = dir_deriv(powers, c, &d);
    if f0 >= 0.0 {
        d = -d;
        f0 = dir_deriv(powers, c, &d);
        if f0 >= -1e-15 {
            return c.clone();
        }
    }
    let mut t = 1e-2;
    let mut bracketed = false;
    for _ in 0..200 {
        if dir_deriv(powers, &(c + &d * t), &d) > 0.0 {
            bracketed = true;
            break;
        }
        t *= 2.0;
    }
    if !bracketed {
        return c.clone();
    }
    let (mut lo, mut hi) = (0.0_f64, t);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if dir_deriv(powers, &(c + &d * mid), &d) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    c + &d * (0.5 * (lo + hi))
}

/// Minimum-norm element of the convex hull of the top-pair subgradients.
fn min_norm_subgradient(powers: &[DMatrix<f64>], c: &DVector<f64>) -> DVector<f64> {
    let (_, cuts, _) = value_and_cuts(powers, c, tol::SIGMA_MULTIPLICITY_REL);
    let k = c.len();
    let mut g = DMatrix::zeros(cuts.len(), k);
    for (i, cut) in cuts.iter().enumerate() {
        g.row_mut(i).copy_from(&cut.transpose());
    }
    let (_, point) = min_norm_in_hull(&g);
    point
}

/// Minimize `h(c) = sigma_max(p(A; c))` over real coefficient vectors.
pub fn solve_ideal(a: &DMatrix<f64>, k: usize, cfg: &IdealConfig) -> Result<IdealSolution> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let d = min_poly_degree(a, None)?;
    if k < 1 || k >= d {
        return Err(Error::KOutOfRange {
            k,
            max: d.saturating_sub(1),
        });
    }

    let powers = matrix_powers(a, k);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    // Feasible warm start: the GMRES polynomial of a random vector, with
    // the zero polynomial (h = 1) as a second anchor cut.
    let mut c0 = DVector::zeros(k);
    for _ in 0..8 {
        let v0 = random_unit_vector(n, &mut rng);
        if let Ok(r) = gmres_residual(a, &v0, k) {
            if !r.degenerate {
                c0 = DVector::from_column_slice(r.coeffs.as_slice());
                break;
            }
        }
    }

    let mult_tol = tol::SIGMA_MULTIPLICITY_REL;
    let mut cuts_g: Vec<DVector<f64>> = Vec::new();
    let mut cuts_a: Vec<f64> = Vec::new();

    let (h0, g0, _) = value_and_cuts(&powers, &c0, mult_tol);
    for g in g0 {
        cuts_a.push(h0 - g.dot(&c0));
        cuts_g.push(g);
    }
    let zero = DVector::zeros(k);
    let (hz, gz, _) = value_and_cuts(&powers, &zero, mult_tol);
    for g in gz {
        cuts_a.push(hz - g.dot(&zero));
        cuts_g.push(g);
    }

    let (mut cbest, mut hbest) = if h0 <= hz { (c0, h0) } else { (zero, hz) };
    let mut t = 1.0_f64;
    let mut null_count = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < cfg.max_iters {
        iterations += 1;
        let m = cuts_g.len();
        let mut gmat = DMatrix::zeros(m, k);
        let mut evec = DVector::zeros(m);
        for i in 0..m {
            gmat.row_mut(i).copy_from(&cuts_g[i].transpose());
            evec[i] = cuts_a[i] + cuts_g[i].dot(&cbest) - hbest;
        }
        let (lam, _) = simplex_qp(&evec, &gmat, t);
        let gagg = gmat.transpose() * &lam;
        let cnew = &cbest - &gagg * t;
        let model_val = (0..m)
            .map(|i| cuts_a[i] + cuts_g[i].dot(&cnew))
            .fold(f64::NEG_INFINITY, f64::max);
        let pred = hbest - (model_val + (&cnew - &cbest).norm_squared() / (2.0 * t));

        if pred <= cfg.tol * hbest.abs().max(1.0) {
            if t < 1e-7 {
                converged = true;
                break;
            }
            t *= 0.2;
            continue;
        }

        let (hnew, gnew, _) = value_and_cuts(&powers, &cnew, mult_tol);
        for g in gnew {
            cuts_a.push(hnew - g.dot(&cnew));
            cuts_g.push(g);
        }
        if cuts_g.len() > 60 {
            let cut = cuts_g.len() - 60;
            cuts_g.drain(0..cut);
            cuts_a.drain(0..cut);
        }
        if hnew <= hbest - 0.05 * pred {
            cbest = cnew;
            hbest = hnew;
            t = (t * 1.5).min(1e4);
            null_count = 0;
        } else {
            null_count += 1;
            if null_count > 3 {
                t = (t * 0.5).max(1e-12);
                null_count = 0;
            }
        }
    }

    // Polish: exact line minimizations along coordinates, the steepest
    // descent direction from the pairwise subdifferential, and a couple of
    // random directions per sweep.
    for _ in 0..cfg.polish_sweeps {
        let before = hbest;
        for i in 0..k {
            let mut dvec = DVector::zeros(k);
            dvec[i] = 1.0;
            cbest = line_min(&powers, &cbest, &dvec);
        }
        let sg = min_norm_subgradient(&powers, &cbest);
        if sg.norm() > 1e-15 {
            cbest = line_min(&powers, &cbest, &(-sg));
        }
        for _ in 0..2 {
            let dvec =
                DVector::from_fn(k, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            cbest = line_min(&powers, &cbest, &dvec);
        }
        let (hcur, _, _) = value_and_cuts(&powers, &cbest, mult_tol);
        hbest = hcur;
        if before - hbest < 1e-15 * hbest.abs().max(1.0) {
            break;
        }
    }

    let (hfin, _, sigmas) = value_and_cuts(&powers, &cbest, mult_tol);
    let subgrad = min_norm_subgradient(&powers, &cbest);
    let sigma_gap = if sigmas.len() > 1 {
        sigmas[0] - sigmas[1]
    } else {
        sigmas[0]
    };

    Ok(IdealSolution {
        phi: hfin,
        coeffs: PolyCoeffs::new(cbest),
        sigma_gap,
        subgrad_norm: subgrad.norm(),
        iterations,
        converged: converged || subgrad.norm() <= 1e-8,
    })
}

/// Verdict of the worst-case/ideal equality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equality {
    Equal,
    Strict,
    Undecided,
}

/// Equality certificate data: the orthogonality defect minimized over the
/// top singular subspace of the ideal residual matrix, plus the value gap.
#[derive(Debug, Clone)]
pub struct EqualityCertificate {
    pub verdict: Equality,
    /// Best witness found in the top singular subspace.
    pub witness: DVector<f64>,
    pub min_defect: f64,
    pub phi: f64,
    pub psi_estimate: f64,
    pub multiplicity: usize,
    /// GMRES value at the witness; equals `phi` when the verdict is
    /// `Equal`.
    pub gmres_at_witness: f64,
}

/// Orthogonality defect of `v` for the polynomial `c`: the relative size
/// of the component of `p(A; c) v` inside `span{A v, ..., A^k v}`. Zero
/// means `p(.; c)` is the GMRES polynomial of `v` and its residual norm
/// is attained by GMRES at `v`.
fn orthogonality_defect(
    a: &DMatrix<f64>,
    powers: &[DMatrix<f64>],
    c: &DVector<f64>,
    v: &DVector<f64>,
    k: usize,
) -> f64 {
    let w = poly_matrix(powers, c) * v;
    let cols = power_columns(a, v, k, false);
    let drop_tol = rank_drop_tol(&cols, None);
    let orth = mgs(&cols, drop_tol);
    let mut inside = 0.0_f64;
    let mut resid = w.clone();
    for _ in 0..2 {
        for q in &orth.q {
            let h = q.dot(&resid);
            inside += h * h;
            resid -= q * h;
        }
    }
    inside.sqrt() / w.norm()
}

/// Minimize the orthogonality defect over unit vectors of the top
/// singular subspace: a fine angular grid (for the twofold case) plus
/// seeded starts refined by projected descent with finite-difference
/// gradients.
fn min_defect_witness(
    a: &DMatrix<f64>,
    powers: &[DMatrix<f64>],
    c: &DVector<f64>,
    vtop: &DMatrix<f64>,
    k: usize,
    seed: u64,
) -> (f64, DVector<f64>) {
    let m = vtop.ncols();
    let eval = |x: &DVector<f64>| {
        let v = vtop * x;
        let v = &v / v.norm();
        orthogonality_defect(a, powers, c, &v, k)
    };
    if m == 1 {
        let x = DVector::from_element(1, 1.0);
        let v = vtop.column(0).into_owned();
        return (eval(&x), v);
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut starts: Vec<DVector<f64>> = Vec::new();
    for i in 0..m {
        let mut x = DVector::zeros(m);
        x[i] = 1.0;
        starts.push(x);
    }
    for i in 0..tol::EQUALITY_ANGULAR_SAMPLES {
        let theta = std::f64::consts::PI * i as f64 / tol::EQUALITY_ANGULAR_SAMPLES as f64;
        let mut x = DVector::zeros(m);
        x[0] = theta.cos();
        x[1] = theta.sin();
        starts.push(x);
    }
    for _ in 0..12 {
        starts.push(random_unit_vector(m, &mut rng));
    }

    // keep the most promising starts for the descent phase
    let mut scored: Vec<(f64, DVector<f64>)> = starts.into_iter().map(|x| (eval(&x), x)).collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    scored.truncate(8);

    let mut best = scored[0].clone();
    for (f0, x0) in scored {
        let mut x = x0;
        let mut fx = f0;
        let mut step = 0.3_f64;
        for _ in 0..300 {
            let h = 1e-7;
            let mut grad = DVector::zeros(m);
            for i in 0..m {
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                grad[i] = (eval(&xp) - eval(&xm)) / (2.0 * h);
            }
            let gdx = grad.dot(&x);
            grad -= &x * gdx;
            let gn = grad.norm();
            if gn < 1e-13 {
                break;
            }
            let mut moved = false;
            while step > 1e-16 {
                let mut xt = &x - &grad * step;
                xt /= xt.norm();
                let ft = eval(&xt);
                if ft < fx - 1e-4 * step * gn * gn {
                    x = xt;
                    fx = ft;
                    step = (step * 1.7).min(1.0);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if fx < best.0 {
            best = (fx, x);
        }
    }
    let v = vtop * &best.1;
    let v = &v / v.norm();
    (best.0, v.clone())
}

/// The best equality witness alone: the unit vector of the top singular
/// subspace with the smallest orthogonality defect. Useful as a warm
/// start for worst-case solves.
pub fn equality_witness(
    a: &DMatrix<f64>,
    k: usize,
    ideal: &IdealSolution,
    seed: u64,
) -> (f64, DVector<f64>) {
    let powers = matrix_powers(a, k);
    let eval = eval_spectral_norm_poly(a, &ideal.coeffs);
    let c = DVector::from_column_slice(ideal.coeffs.as_slice());
    min_defect_witness(a, &powers, &c, &eval.right, k, seed)
}

/// Decide whether the worst-case and ideal values coincide for `(A, k)`.
///
/// Equality holds exactly when some maximal right singular vector of the
/// ideal residual matrix satisfies the GMRES orthogonality condition; the
/// defect is minimized over the whole top subspace. A `Strict` verdict
/// additionally requires the defect to stay bounded away from zero and
/// the worst-case estimate to sit below `phi`.
pub fn equality_certificate(
    a: &DMatrix<f64>,
    k: usize,
    ideal: &IdealSolution,
    psi_estimate: Option<f64>,
    defect_tol: f64,
    seed: u64,
) -> Result<EqualityCertificate> {
    let powers = matrix_powers(a, k);
    let eval = eval_spectral_norm_poly(a, &ideal.coeffs);
    let c = DVector::from_column_slice(ideal.coeffs.as_slice());
    let (min_defect, witness) = min_defect_witness(a, &powers, &c, &eval.right, k, seed);
    let gmres_at_witness = gmres_residual(a, &witness, k)?.residual_norm;

    let psi = match psi_estimate {
        Some(p) => p.max(gmres_at_witness),
        None => {
            let cfg = WcConfig::new(seed).with_extra_starts(vec![witness.clone()]);
            solve_worst_case(a, k, &cfg)?.psi
        }
    };

    let verdict = if min_defect <= defect_tol {
        Equality::Equal
    } else if min_defect > tol::STRICT_DEFECT_FACTOR * defect_tol
        && psi < ideal.phi - tol::STRICT_GAP_TOL
    {
        Equality::Strict
    } else {
        Equality::Undecided
    };

    Ok(EqualityCertificate {
        verdict,
        witness,
        min_defect,
        phi: ideal.phi,
        psi_estimate: psi,
        multiplicity: eval.multiplicity,
        gmres_at_witness,
    })
}

/// Field-invariance report for the ideal value: complex vectors cannot
/// increase the norm of a real matrix, and complex coefficients cannot
/// beat the real optimum.
#[derive(Debug, Clone)]
pub struct FieldInvarianceReport {
    pub phi: f64,
    /// Max of `||p*(A) b||` over sampled complex unit `b`.
    pub complex_vector_max: f64,
    /// `phi - complex_vector_max`, expected tiny because the real top
    /// singular vector is included in the samples.
    pub complex_vector_gap: f64,
    /// Min of `sigma_max(p(A; c))` over sampled complex perturbations of
    /// the optimum; never below `phi` minus tolerance.
    pub complex_coeff_min: f64,
    pub worst_violation: f64,
    /// `sigma_max(p(A; c* + 0.1 i z))`.
    pub imag_bump_value: f64,
    pub pass: bool,
}

/// Sample-based verification that the ideal value is invariant under
/// complex initial vectors and complex polynomial coefficients.
pub fn ideal_field_invariance_check(
    a: &DMatrix<f64>,
    k: usize,
    ideal: &IdealSolution,
    seed: u64,
) -> FieldInvarianceReport {
    let n = a.nrows();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let p = ideal.coeffs.matrix(a);
    let eval = eval_spectral_norm_poly(a, &ideal.coeffs);
    let phi = eval.value;

    // (a) complex vectors: ||p(A) b|| over complex unit b, including the
    // real top singular vector
    let mut complex_vector_max: f64 = (&p * eval.right.column(0).into_owned()).norm();
    let pc = p.map(|x| Complex::new(x, 0.0));
    for _ in 0..30 {
        let re = random_unit_vector(n, &mut rng);
        let im = random_unit_vector(n, &mut rng);
        let mut b = DVector::from_fn(n, |i, _| Complex::new(re[i], im[i]));
        let bn = b.norm();
        b /= Complex::new(bn, 0.0);
        complex_vector_max = complex_vector_max.max((&pc * b).norm());
    }

    // (b) complex coefficients: sigma_max of p(A; c) for perturbed complex c
    let powers = matrix_powers(a, k);
    let base: Vec<Complex<f64>> = ideal
        .coeffs
        .as_slice()
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .collect();
    let sigma_complex = |c: &[Complex<f64>]| -> f64 {
        let mut m =
            DMatrix::from_fn(n, n, |i, j| Complex::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        for (j, pw) in powers.iter().take(k).enumerate() {
            let pcj = pw.map(|x| Complex::new(x, 0.0));
            m -= pcj * c[j];
        }
        let svd = m.svd(false, false);
        svd.singular_values.iter().cloned().fold(0.0_f64, f64::max)
    };
    let mut complex_coeff_min = f64::INFINITY;
    let mut imag_bump_value = 0.0;
    for delta in [0.1, 0.01] {
        for j in 0..k {
            let mut c = base.clone();
            c[j] += Complex::new(0.0, delta);
            let v = sigma_complex(&c);
            complex_coeff_min = complex_coeff_min.min(v);
            if j == 0 && delta == 0.1 {
                imag_bump_value = v;
            }
        }
    }
    for _ in 0..10 {
        let mut c = base.clone();
        for item in c.iter_mut() {
            *item += Complex::new(
                0.05 * rng.sample::<f64, _>(rand_distr::StandardNormal),
                0.05 * rng.sample::<f64, _>(rand_distr::StandardNormal),
            );
        }
        complex_coeff_min = complex_coeff_min.min(sigma_complex(&c));
    }

    let complex_vector_gap = phi - complex_vector_max;
    let worst_violation = (phi - complex_coeff_min).max(0.0);
    let pass = complex_vector_max <= phi * (1.0 + 1e-10)
        && complex_vector_gap.abs() <= 1e-8 * phi.max(1.0)
        && worst_violation <= 1e-8
        && imag_bump_value >= phi - 1e-12;

    FieldInvarianceReport {
        phi,
        complex_vector_max,
        complex_vector_gap,
        complex_coeff_min,
        worst_violation,
        imag_bump_value,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{gen_jordan, gen_toh, TohParams};
    use approx::assert_relative_eq;

    #[test]
    fn spectral_norm_of_identity_polynomial() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let eval = eval_spectral_norm_poly(&a, &PolyCoeffs::zeros(3));
        assert_relative_eq!(eval.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn diagonal_k1_closed_form() {
        let a = DMatrix::from_partial_diagonal(3, 3, &[1.0, 2.0, 3.0]);
        let eval = eval_spectral_norm_poly(&a, &PolyCoeffs::from_slice(&[0.5]));
        assert_relative_eq!(eval.value, 0.5, epsilon = 1e-14);
        let sol = solve_ideal(&a, 1, &IdealConfig::new(1)).unwrap();
        assert_relative_eq!(sol.phi, 0.5, epsilon = 1e-10);
        assert_relative_eq!(sol.coeffs.as_slice()[0], 0.5, epsilon = 1e-8);
    }

    #[test]
    fn toh_closed_form_across_omega() {
        for &omega in &[0.5, 1.0, 1.5] {
            let a = gen_toh(TohParams::new(omega, 0.1).unwrap());
            let sol = solve_ideal(&a, 3, &IdealConfig::new(2)).unwrap();
            let alpha = 2.0 * omega * omega / (4.0 + omega * omega);
            let c = sol.coeffs.as_slice();
            assert!(c[0].abs() < 1e-6, "omega={omega}: c1 = {}", c[0]);
            assert!(
                (c[1] - (1.0 - alpha)).abs() < 1e-6,
                "omega={omega}: c2 = {} vs {}",
                c[1],
                1.0 - alpha
            );
            assert!(c[2].abs() < 1e-6, "omega={omega}: c3 = {}", c[2]);
            // twofold top singular value, sigma_3 clearly separated
            let eval = eval_spectral_norm_poly(&a, &sol.coeffs);
            assert_eq!(eval.multiplicity, 2, "omega={omega}");
            assert!(eval.sigmas[2] < 0.9 * eval.sigmas[0]);
        }
    }

    #[test]
    fn toh_values_match_closed_form_sigmas() {
        // for omega = 1: p*(z) = 1 - 0.6 z^2 and sigma(p*(A)) = (0.8, 0.8, 0.2, 0.2)
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let sol = solve_ideal(&a, 3, &IdealConfig::new(3)).unwrap();
        assert_relative_eq!(sol.phi, 0.8, epsilon = 1e-9);
        let eval = eval_spectral_norm_poly(&a, &sol.coeffs);
        assert_relative_eq!(eval.sigmas[1], 0.8, epsilon = 1e-8);
        assert_relative_eq!(eval.sigmas[2], 0.2, epsilon = 1e-8);
    }

    #[test]
    fn uniqueness_across_seeds() {
        let a = gen_jordan(7, 1.0, 1.0).unwrap();
        let s1 = solve_ideal(&a, 3, &IdealConfig::new(1)).unwrap();
        let s2 = solve_ideal(&a, 3, &IdealConfig::new(99)).unwrap();
        let dev = (DVector::from_column_slice(s1.coeffs.as_slice())
            - DVector::from_column_slice(s2.coeffs.as_slice()))
        .norm();
        assert!(dev < 1e-6, "coefficient deviation {dev}");
    }

    #[test]
    fn k_out_of_range_errors() {
        let a = DMatrix::from_partial_diagonal(3, 3, &[1.0, 2.0, 3.0]);
        assert!(matches!(
            solve_ideal(&a, 3, &IdealConfig::new(0)),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            solve_ideal(&a, 0, &IdealConfig::new(0)),
            Err(Error::KOutOfRange { .. })
        ));
    }

    #[test]
    fn jordan_equality_certificate() {
        let a = gen_jordan(11, 1.0, 1.0).unwrap();
        let sol = solve_ideal(&a, 5, &IdealConfig::new(4)).unwrap();
        let eval = eval_spectral_norm_poly(&a, &sol.coeffs);
        assert_eq!(eval.multiplicity, 1);
        let cert = equality_certificate(&a, 5, &sol, None, tol::EQUALITY_DEFECT_TOL, 4).unwrap();
        assert_eq!(cert.verdict, Equality::Equal, "defect {}", cert.min_defect);
        assert_relative_eq!(cert.gmres_at_witness, sol.phi, max_relative = 1e-8);
    }

    #[test]
    fn toh_strict_certificate() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let sol = solve_ideal(&a, 3, &IdealConfig::new(5)).unwrap();
        let cert = equality_certificate(&a, 3, &sol, None, tol::EQUALITY_DEFECT_TOL, 5).unwrap();
        assert_eq!(cert.verdict, Equality::Strict, "defect {}", cert.min_defect);
        assert!(cert.psi_estimate < cert.phi - 1e-3);
    }

    #[test]
    fn normal_matrix_equality_certificate() {
        let a = DMatrix::from_partial_diagonal(3, 3, &[1.0, 2.0, 3.0]);
        for k in 1..=2 {
            let sol = solve_ideal(&a, k, &IdealConfig::new(6)).unwrap();
            let cert =
                equality_certificate(&a, k, &sol, None, tol::EQUALITY_DEFECT_TOL, 6).unwrap();
            assert_eq!(
                cert.verdict,
                Equality::Equal,
                "k={k} defect {}",
                cert.min_defect
            );
        }
    }

    #[test]
    fn field_invariance_on_toh() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let sol = solve_ideal(&a, 3, &IdealConfig::new(7)).unwrap();
        let report = ideal_field_invariance_check(&a, 3, &sol, 7);
        assert!(report.pass, "{report:?}");
        assert!(report.imag_bump_value >= report.phi);
    }

    #[test]
    fn convexity_spot_checks() {
        use rand::SeedableRng;
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let powers = matrix_powers(&a, 3);
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(12);
        for _ in 0..20 {
            let c1 = DVector::from_fn(3, |_, _| {
                rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
            });
            let c2 = DVector::from_fn(3, |_, _| {
                rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
            });
            let mid = (&c1 + &c2) * 0.5;
            let (h1, _, _) = value_and_cuts(&powers, &c1, 1e-8);
            let (h2, _, _) = value_and_cuts(&powers, &c2, 1e-8);
            let (hm, _, _) = value_and_cuts(&powers, &mid, 1e-8);
            assert!(hm <= 0.5 * (h1 + h2) + 1e-12);
        }
    }

    #[test]
    fn sandwich_against_worst_case() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let ideal = solve_ideal(&a, 3, &IdealConfig::new(8)).unwrap();
        let wc = solve_worst_case(&a, 3, &WcConfig::new(8)).unwrap();
        assert!(wc.psi <= ideal.phi + 1e-8);
        assert!(ideal.phi <= 1.0 + 1e-12);
    }

    #[test]
    fn parity_of_toh_ideal_polynomial() {
        // odd coefficients vanish for the Toh family
        for &omega in &[0.6, 1.0, 1.4] {
            let a = gen_toh(TohParams::new(omega, 0.1).unwrap());
            let sol = solve_ideal(&a, 3, &IdealConfig::new(9)).unwrap();
            assert!(sol.coeffs.as_slice()[0].abs() <= 1e-8);
            assert!(sol.coeffs.as_slice()[2].abs() <= 1e-8);
        }
    }
}
