//! Cross iterations: alternating GMRES sweeps with `A` and `A^T` whose
//! residual norms interlace and converge from below toward the worst-case
//! value, plus the cross-equality predicate those limits satisfy.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krylov::gmres_residual;
use crate::linalg::{mgs, power_columns, rank_drop_tol, sign_normalize};
use crate::tol;

/// Trace of a cross-iteration run.
///
/// For Algorithm 1 the `r_norms`/`s_norms` sequences interlace:
/// `r_1 <= s_1 <= r_2 <= s_2 <= ... <= 1`. Algorithm 2 records its single
/// greedy sequence in `r_norms` and leaves `s_norms` empty.
#[derive(Debug, Clone)]
pub struct CrossTrace {
    pub k: usize,
    pub r_norms: Vec<f64>,
    pub s_norms: Vec<f64>,
    pub final_vector: DVector<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl CrossTrace {
    /// Final residual norm reached by the run.
    pub fn limit_value(&self) -> f64 {
        self.s_norms
            .last()
            .or(self.r_norms.last())
            .copied()
            .unwrap_or(0.0)
    }

    /// Export as CSV with columns `(j, r_norm, s_norm)`; the `s_norm`
    /// field is left empty for Algorithm-2 traces.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path.as_ref())?;
        writeln!(f, "j,r_norm,s_norm")?;
        for j in 0..self.r_norms.len() {
            match self.s_norms.get(j) {
                Some(s) => writeln!(f, "{},{:.17e},{:.17e}", j + 1, self.r_norms[j], s)?,
                None => writeln!(f, "{},{:.17e},", j + 1, self.r_norms[j])?,
            }
        }
        Ok(())
    }
}

fn check_unit_start(b0: &DVector<f64>) -> Result<DVector<f64>> {
    let norm = b0.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(b0 / norm)
}

/// Alternating sweeps `r = GMRES(A, b, k)`, `s = GMRES(A^T, r/||r||, k)`,
/// `b <- s/||s||`, stopping once the relative gap `s - r` drops below
/// `tol` or after `max_iter` sweeps. The start must satisfy
/// `d(A, b0) > k`, otherwise the first residual vanishes.
pub fn cross_iterations_1(
    a: &DMatrix<f64>,
    b0: &DVector<f64>,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<CrossTrace> {
    let at = a.transpose();
    let mut b = check_unit_start(b0)?;
    let mut r_norms = Vec::new();
    let mut s_norms = Vec::new();
    let mut converged = false;

    for j in 0..max_iter.max(1) {
        let r = gmres_residual(a, &b, k)?;
        if r.degenerate {
            if j == 0 {
                return Err(Error::DegenerateStart { k });
            }
            break;
        }
        r_norms.push(r.residual_norm);
        let c = &r.residual / r.residual_norm;
        let s = gmres_residual(&at, &c, k)?;
        if s.degenerate {
            break;
        }
        s_norms.push(s.residual_norm);
        b = &s.residual / s.residual_norm;
        if s.residual_norm - r.residual_norm < tol * s.residual_norm {
            converged = true;
            break;
        }
    }

    let iterations = r_norms.len();
    Ok(CrossTrace {
        k,
        r_norms,
        s_norms,
        final_vector: sign_normalize(&b),
        converged,
        iterations,
    })
}

/// Greedy variant: at each step both `GMRES(A, b, k)` and
/// `GMRES(A^T, b, k)` are computed and the residual of larger norm is
/// kept (ties keep the `A`-side residual). The kept norms form a
/// nondecreasing sequence recorded in `r_norms`.
pub fn cross_iterations_2(
    a: &DMatrix<f64>,
    b0: &DVector<f64>,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<CrossTrace> {
    let at = a.transpose();
    let mut b = check_unit_start(b0)?;
    let mut t_norms: Vec<f64> = Vec::new();
    let mut converged = false;

    for j in 0..max_iter.max(1) {
        let v = gmres_residual(a, &b, k)?;
        let w = gmres_residual(&at, &b, k)?;
        if v.degenerate && w.degenerate {
            if j == 0 {
                return Err(Error::DegenerateStart { k });
            }
            break;
        }
        let t = if v.residual_norm < w.residual_norm { w } else { v };
        let prev = t_norms.last().copied();
        t_norms.push(t.residual_norm);
        b = &t.residual / t.residual_norm;
        if let Some(p) = prev {
            if t.residual_norm - p < tol * t.residual_norm {
                converged = true;
                break;
            }
        }
    }

    let iterations = t_norms.len();
    Ok(CrossTrace {
        k,
        r_norms: t_norms,
        s_norms: Vec::new(),
        final_vector: sign_normalize(&b),
        converged,
        iterations,
    })
}

/// Outcome of the cross-equality test: the predicate together with the
/// Krylov-membership defect it is based on.
#[derive(Debug, Clone)]
pub struct CrossEquality {
    pub satisfied: bool,
    /// `||b - P b||` where `P` projects onto `K_{k+1}(A^T, r_k)`.
    pub membership_defect: f64,
    pub residual_norm: f64,
}

/// Whether the unit vector `b` satisfies the cross equality for `A` and
/// step `k`: one `A`-sweep followed by one `A^T`-sweep reproduces `b` up
/// to scaling. Equivalent to membership of `b` in the Krylov space
/// `K_{k+1}(A^T, r_k)`, which is what is tested here.
pub fn satisfies_cross_equality(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    k: usize,
    tol: f64,
) -> Result<CrossEquality> {
    let bu = check_unit_start(b)?;
    let r = gmres_residual(a, &bu, k)?;
    if r.degenerate {
        return Err(Error::DegenerateStart { k });
    }
    let at = a.transpose();
    let cols = power_columns(&at, &r.residual, k, true);
    let drop_tol = rank_drop_tol(&cols, None);
    let orth = mgs(&cols, drop_tol);
    let mut defect = bu.clone();
    for _ in 0..2 {
        for q in &orth.q {
            let h = q.dot(&defect);
            defect -= q * h;
        }
    }
    let membership_defect = defect.norm();
    Ok(CrossEquality {
        satisfied: membership_defect <= tol,
        membership_defect,
        residual_norm: r.residual_norm,
    })
}

/// Fixed-point refinement: a fixed number of Algorithm-1 sweeps with no
/// stopping test. The norm gap reaches machine noise well before the
/// vector itself stops moving, so limits intended for further
/// certification (cross-equality tests at tight tolerances) are pushed a
/// few dozen extra sweeps here.
pub fn refine_cross_limit(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    k: usize,
    sweeps: usize,
) -> Result<DVector<f64>> {
    let at = a.transpose();
    let mut b = check_unit_start(b)?;
    for _ in 0..sweeps {
        let r = gmres_residual(a, &b, k)?;
        if r.degenerate {
            break;
        }
        let s = gmres_residual(&at, &(&r.residual / r.residual_norm), k)?;
        if s.degenerate {
            break;
        }
        b = &s.residual / s.residual_norm;
    }
    Ok(sign_normalize(&b))
}

/// Interlacing check for an Algorithm-1 trace:
/// `r_j <= s_j <= r_{j+1}` within `slack`.
pub fn interlacing_holds(trace: &CrossTrace, slack: f64) -> bool {
    let n = trace.s_norms.len();
    for j in 0..n {
        if trace.r_norms[j] > trace.s_norms[j] + slack {
            return false;
        }
        if j + 1 < trace.r_norms.len() && trace.s_norms[j] > trace.r_norms[j + 1] + slack {
            return false;
        }
    }
    true
}

/// Default-configured Algorithm-1 run.
pub fn cross_iterations_1_default(
    a: &DMatrix<f64>,
    b0: &DVector<f64>,
    k: usize,
) -> Result<CrossTrace> {
    cross_iterations_1(a, b0, k, tol::CROSS_TOL, tol::CROSS_MAX_ITER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unit_vector;
    use crate::matgen::{gen_jordan, gen_toh, TohParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn full_degree_start_satisfies_cross_equality_at_last_step() {
        // k = n-1 and d(A,b) = n: the cross equality holds immediately
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let b = random_unit_vector(4, &mut rng);
        let ce = satisfies_cross_equality(&a, &b, 3, 1e-8).unwrap();
        assert!(
            ce.satisfied,
            "membership defect {}",
            ce.membership_defect
        );
        let trace = cross_iterations_1(&a, &b, 3, 1e-12, 50).unwrap();
        assert!(trace.converged);
        assert!((trace.r_norms[0] - trace.s_norms[0]).abs() <= 1e-12);
    }

    #[test]
    fn random_vector_fails_cross_equality_generically() {
        let a = gen_jordan(11, 1.0, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let b = random_unit_vector(11, &mut rng);
        let ce = satisfies_cross_equality(&a, &b, 5, 1e-8).unwrap();
        assert!(!ce.satisfied);
    }

    #[test]
    fn algorithm_one_limit_satisfies_cross_equality() {
        let a = gen_jordan(11, 1.0, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let b0 = random_unit_vector(11, &mut rng);
        let trace = cross_iterations_1(&a, &b0, 5, 0.0, 400).unwrap();
        assert!(interlacing_holds(&trace, tol::INTERLACE_SLACK));
        let limit = refine_cross_limit(&a, &trace.final_vector, 5, 100).unwrap();
        let ce = satisfies_cross_equality(&a, &limit, 5, 1e-8).unwrap();
        assert!(
            ce.satisfied,
            "limit defect {} after {} sweeps",
            ce.membership_defect, trace.iterations
        );
    }

    #[test]
    fn fixed_point_sweep_preserves_norm_and_vector() {
        let a = gen_jordan(11, 1.0, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let b0 = random_unit_vector(11, &mut rng);
        let rough = cross_iterations_1(&a, &b0, 5, 0.0, 500).unwrap().final_vector;
        let limit = refine_cross_limit(&a, &rough, 5, 150).unwrap();
        let one_sweep = cross_iterations_1(&a, &limit, 5, f64::INFINITY, 1).unwrap();
        // equality holds in the interlacing chain at a cross-equality vector
        assert!((one_sweep.r_norms[0] - one_sweep.s_norms[0]).abs() < 1e-10);
        let diff = (&one_sweep.final_vector - &limit).norm();
        assert!(diff < 1e-8, "vector moved by {diff}");
    }

    #[test]
    fn symmetric_matrix_greedy_matches_alternating_half_steps() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 4.0],
        );
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let b0 = random_unit_vector(3, &mut rng);
        let alg1 = cross_iterations_1(&a, &b0, 2, 0.0, 6).unwrap();
        let alg2 = cross_iterations_2(&a, &b0, 2, 0.0, 12).unwrap();
        let mut interleaved = Vec::new();
        for j in 0..alg1.r_norms.len() {
            interleaved.push(alg1.r_norms[j]);
            if j < alg1.s_norms.len() {
                interleaved.push(alg1.s_norms[j]);
            }
        }
        for (x, y) in alg2.r_norms.iter().zip(interleaved.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn greedy_sequence_is_nondecreasing() {
        let a = gen_jordan(11, 1.0, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let b0 = random_unit_vector(11, &mut rng);
        let trace = cross_iterations_2(&a, &b0, 5, 1e-13, 200).unwrap();
        for w in trace.r_norms.windows(2) {
            assert!(w[1] >= w[0] - tol::INTERLACE_SLACK);
        }
        assert!(trace.limit_value() <= 1.0 + 1e-12);
    }

    #[test]
    fn degenerate_start_is_rejected() {
        let a = DMatrix::from_partial_diagonal(3, 3, &[1.0, 2.0, 3.0]);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            cross_iterations_1(&a, &e1, 1, 1e-12, 10),
            Err(Error::DegenerateStart { k: 1 })
        ));
        assert!(matches!(
            cross_iterations_2(&a, &e1, 1, 1e-12, 10),
            Err(Error::DegenerateStart { k: 1 })
        ));
    }

    #[test]
    fn csv_export_roundtrips_textually() {
        let a = gen_toh(TohParams::new(1.0, 0.1).unwrap());
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let b0 = random_unit_vector(4, &mut rng);
        let trace = cross_iterations_1(&a, &b0, 2, 1e-12, 20).unwrap();
        let dir = std::env::temp_dir().join("wcgmres-cross-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trace.csv");
        trace.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "j,r_norm,s_norm");
        assert_eq!(text.lines().count(), trace.r_norms.len() + 1);
    }
}
