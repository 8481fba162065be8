//! Real/complex variants of the worst-case problem: the block-embedding
//! identity that turns complex initial vectors into a doubled real
//! problem, the ideal-witness construction on the doubled Toh matrix, the
//! theta sweep over complex combinations of two real witnesses, and the
//! ordering audit of the four field variants.

use std::io::Write;
use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::idealsolver::{eval_spectral_norm_poly, solve_ideal, IdealConfig, IdealSolution};
use crate::krylov::{gmres_residual, gmres_residual_complex, CoeffField};
use crate::linalg::random_unit_vector;
use crate::matgen::block_diag_double;
use crate::wcsolver::{solve_worst_case, WcConfig, WorstCaseSolution};

/// One row of the theta sweep.
#[derive(Debug, Clone, Copy)]
pub struct ThetaSweepRow {
    pub theta: f64,
    /// GMRES value of the stacked vector `[(cos t) b; (sin t) c]` on the
    /// doubled matrix.
    pub value: f64,
    /// `value - psi_ref`.
    pub excess: f64,
}

/// Write sweep rows as CSV `(theta, value, excess)`.
pub fn write_theta_csv(rows: &[ThetaSweepRow], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path.as_ref())?;
    writeln!(f, "theta,value,excess")?;
    for r in rows {
        writeln!(f, "{:.17e},{:.17e},{:.17e}", r.theta, r.value, r.excess)?;
    }
    Ok(())
}

/// Recommended extra starts for the doubled problem, built from the top
/// singular subspace of the ideal residual matrix of `A`: stacked pairs
/// of top right singular vectors attain the embedding value on the Toh
/// family, and are good warm starts in general.
pub fn embedding_starts(a: &DMatrix<f64>, ideal: &IdealSolution) -> Vec<DVector<f64>> {
    let n = a.nrows();
    let eval = eval_spectral_norm_poly(a, &ideal.coeffs);
    let m = eval.multiplicity;
    let mut starts = Vec::new();
    let stack = |top: &DVector<f64>, bottom: &DVector<f64>| {
        let mut w = DVector::zeros(2 * n);
        for i in 0..n {
            w[i] = top[i];
            w[n + i] = bottom[i];
        }
        let norm = w.norm();
        w / norm
    };
    let zero = DVector::zeros(n);
    for i in 0..m {
        let vi = eval.right.column(i).into_owned();
        starts.push(stack(&vi, &zero));
        starts.push(stack(&zero, &vi));
        for j in 0..m {
            if i != j {
                let vj = eval.right.column(j).into_owned();
                starts.push(stack(&vi, &vj));
            }
        }
    }
    starts
}

/// The worst-case value over complex initial vectors with real
/// polynomials, computed as the plain real worst-case value of the block
/// diagonal doubled matrix (the squared objective splits into real and
/// imaginary parts). Warm starts from the ideal solution of `A` are
/// added to the configured ones.
pub fn psi_real_complex_via_embedding(
    a: &DMatrix<f64>,
    k: usize,
    cfg: &WcConfig,
) -> Result<WorstCaseSolution> {
    let b = block_diag_double(a);
    let mut cfg = cfg.clone();
    if let Ok(ideal) = solve_ideal(a, k, &IdealConfig::new(cfg.seed)) {
        let mut extra = embedding_starts(a, &ideal);
        cfg.extra_starts.append(&mut extra);
    }
    solve_worst_case(&b, k, &cfg)
}

/// Report of the doubled-matrix witness construction on the Toh family.
#[derive(Debug, Clone)]
pub struct Lemma63Report {
    pub phi: f64,
    /// `||p*(B) w||` for the stacked witness `w = [v1; v2]/sqrt(2)`.
    pub stacked_norm_value: f64,
    /// `u_1^T A^j v_1 + u_2^T A^j v_2` for `j = 1, 2, 3`.
    pub ortho_sums: [f64; 3],
    /// The two diagonal terms of each sum.
    pub per_pair: [[f64; 2]; 3],
    /// GMRES value at `w` on the doubled matrix.
    pub gmres_value: f64,
    /// Residual of rotating the computed top subspace onto the expected
    /// sparsity pattern.
    pub pattern_residual: f64,
    pub witness: DVector<f64>,
    pub pass: bool,
}

/// Verify the stacked-witness construction: the two top singular pairs of
/// the ideal residual matrix, rotated onto their sparsity pattern
/// (`v1` supported on components 2 and 4, `v2` on 1 and 3), give a unit
/// vector `w = [v1; v2]/||.||` whose GMRES value on the doubled matrix
/// equals the ideal value of `A`.
pub fn lemma63_witness_check(
    a: &DMatrix<f64>,
    ideal_seed: u64,
    tol_check: f64,
) -> Result<Lemma63Report> {
    if a.nrows() != 4 || a.ncols() != 4 {
        return Err(Error::DimensionMismatch(
            "the stacked-witness construction expects the 4x4 Toh matrix".into(),
        ));
    }
    let ideal = solve_ideal(a, 3, &IdealConfig::new(ideal_seed))?;
    let eval = eval_spectral_norm_poly(a, &ideal.coeffs);
    if eval.multiplicity != 2 {
        return Err(Error::PairingAmbiguity(format!(
            "top singular value has multiplicity {} instead of 2",
            eval.multiplicity
        )));
    }
    let sigma = eval.value;
    let p = ideal.coeffs.matrix(a);

    // Rotate within the top subspace so the first column vanishes on
    // components 1 and 3 (zero-based 0 and 2): a 2x2 symmetric
    // eigenproblem on the selected component mass.
    let v2cols = &eval.right;
    let mut mass = nalgebra::Matrix2::zeros();
    for &pos in &[0usize, 2] {
        let row = DVector::from_vec(vec![v2cols[(pos, 0)], v2cols[(pos, 1)]]);
        mass += nalgebra::Matrix2::new(
            row[0] * row[0],
            row[0] * row[1],
            row[1] * row[0],
            row[1] * row[1],
        );
    }
    let eig = nalgebra::SymmetricEigen::new(mass);
    let (small_idx, big_idx) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let pattern_residual = eig.eigenvalues[small_idx].max(0.0).sqrt();
    if pattern_residual > 1e-6 {
        return Err(Error::PairingAmbiguity(format!(
            "top subspace cannot be rotated onto the sparsity pattern (residual {pattern_residual:.3e})"
        )));
    }
    let x1 = eig.eigenvectors.column(small_idx);
    let x2 = eig.eigenvectors.column(big_idx);
    let v1 = v2cols.column(0) * x1[0] + v2cols.column(1) * x1[1];
    let v2 = v2cols.column(0) * x2[0] + v2cols.column(1) * x2[1];
    let u1 = &p * &v1 / sigma;
    let u2 = &p * &v2 / sigma;

    let mut ortho_sums = [0.0_f64; 3];
    let mut per_pair = [[0.0_f64; 2]; 3];
    let mut aj = DMatrix::<f64>::identity(4, 4);
    for j in 0..3 {
        aj = &aj * a;
        let t1 = u1.dot(&(&aj * &v1));
        let t2 = u2.dot(&(&aj * &v2));
        per_pair[j] = [t1, t2];
        ortho_sums[j] = t1 + t2;
    }

    let mut w = DVector::zeros(8);
    for i in 0..4 {
        w[i] = v1[i];
        w[4 + i] = v2[i];
    }
    w /= w.norm();
    let bdouble = block_diag_double(a);
    let pb = crate::krylov::PolyCoeffs::from_slice(ideal.coeffs.as_slice());
    let stacked_norm_value = pb.apply(&bdouble, &w).norm();
    let gmres_value = gmres_residual(&bdouble, &w, 3)?.residual_norm;

    let pass = (stacked_norm_value - sigma).abs() <= tol_check
        && ortho_sums.iter().all(|s| s.abs() <= tol_check)
        && (gmres_value - ideal.phi).abs() <= tol_check;

    Ok(Lemma63Report {
        phi: ideal.phi,
        stacked_norm_value,
        ortho_sums,
        per_pair,
        gmres_value,
        pattern_residual,
        witness: w,
        pass,
    })
}

/// GMRES values of the stacked vectors `g(t) = [(cos t) b; (sin t) c]` on
/// the doubled matrix for `n_theta` equispaced angles in `[0, pi]`.
/// `psi_ref` supplies the reference level the `excess` column is measured
/// against.
pub fn theta_sweep(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    k: usize,
    n_theta: usize,
    psi_ref: f64,
) -> Result<Vec<ThetaSweepRow>> {
    let n = a.nrows();
    if b.len() != n || c.len() != n {
        return Err(Error::DimensionMismatch(
            "sweep vectors must match the operator dimension".into(),
        ));
    }
    let big = block_diag_double(a);
    let mut rows = Vec::with_capacity(n_theta);
    for i in 0..n_theta {
        let theta = std::f64::consts::PI * i as f64 / (n_theta.max(2) - 1) as f64;
        let mut g = DVector::zeros(2 * n);
        for j in 0..n {
            g[j] = theta.cos() * b[j];
            g[n + j] = theta.sin() * c[j];
        }
        let value = if g.norm() > 0.0 {
            gmres_residual(&big, &g, k)?.residual_norm / g.norm()
        } else {
            0.0
        };
        rows.push(ThetaSweepRow {
            theta,
            value,
            excess: value - psi_ref,
        });
    }
    Ok(rows)
}

/// Audit of the variant ordering: real-vector value, sampled lower bound
/// for the complex/complex variant, and the embedding value for complex
/// vectors with real polynomials.
#[derive(Debug, Clone)]
pub struct VariantAuditReport {
    /// Worst-case value over real vectors (equals the complex-polynomial,
    /// real-vector variant).
    pub psi_rr: f64,
    /// Embedding value: complex vectors, real polynomials.
    pub psi_rc: f64,
    /// Sampled lower bound for complex vectors with complex polynomials.
    pub psi_cc_lower: f64,
    /// Max deviation of the complex-coefficient GMRES value from the real
    /// one over sampled real vectors (zero in exact arithmetic).
    pub cr_spot_max_dev: f64,
    pub phi: f64,
    /// Chain `psi_rr <= psi_cc_lower + tol`, `psi_cc_lower <= psi_rc + tol`,
    /// `psi_rc <= phi + tol`.
    pub chain_ok: bool,
    /// `psi_rc - psi_cc_lower`; strictly positive on the Toh family.
    pub rc_minus_cc_lower: f64,
    pub n_samples: usize,
}

/// Assemble and check the ordering chain of the four worst-case variants.
///
/// The complex/complex value is not globally solved; it is bounded below
/// by sampling complex unit vectors (always including the real witness,
/// which makes the bound at least `psi_rr`).
pub fn psi_variant_inequality_audit(
    a: &DMatrix<f64>,
    k: usize,
    cfg: &WcConfig,
    n_samples: usize,
) -> Result<VariantAuditReport> {
    let n = a.nrows();
    let wc = solve_worst_case(a, k, cfg)?;
    let psi_rr = wc.psi;

    let embedded = psi_real_complex_via_embedding(a, k, cfg)?;
    let psi_rc = embedded.psi;

    let ideal = solve_ideal(a, k, &IdealConfig::new(cfg.seed))?;
    let phi = ideal.phi;

    // Sampled lower bound for the complex/complex variant; the real
    // witness is a complex vector too, pinning the bound at psi_rr.
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x9e3779b97f4a7c15);
    let mut psi_cc_lower: f64 = 0.0;
    let witness_c = wc.witness.map(|x| Complex::new(x, 0.0));
    psi_cc_lower =
        psi_cc_lower.max(gmres_residual_complex(a, &witness_c, k, CoeffField::Complex)?.residual_norm);
    for _ in 0..n_samples {
        let re = random_unit_vector(n, &mut rng);
        let im = random_unit_vector(n, &mut rng);
        let mut b = DVector::from_fn(n, |i, _| Complex::new(re[i], im[i]));
        let norm = b.norm();
        b /= Complex::new(norm, 0.0);
        let r = gmres_residual_complex(a, &b, k, CoeffField::Complex)?;
        if !r.degenerate {
            psi_cc_lower = psi_cc_lower.max(r.residual_norm);
        }
    }

    // Spot check: complex coefficients do not help real vectors.
    let mut cr_spot_max_dev = 0.0_f64;
    for _ in 0..6 {
        let b = random_unit_vector(n, &mut rng);
        let real = gmres_residual(a, &b, k)?;
        let cplx =
            gmres_residual_complex(a, &b.map(|x| Complex::new(x, 0.0)), k, CoeffField::Complex)?;
        cr_spot_max_dev = cr_spot_max_dev.max((real.residual_norm - cplx.residual_norm).abs());
    }

    let slack = 1e-8;
    let chain_ok = psi_rr <= psi_cc_lower + slack
        && psi_cc_lower <= psi_rc + slack
        && psi_rc <= phi + slack;

    Ok(VariantAuditReport {
        psi_rr,
        psi_rc,
        psi_cc_lower,
        cr_spot_max_dev,
        phi,
        chain_ok,
        rc_minus_cc_lower: psi_rc - psi_cc_lower,
        n_samples,
    })
}
