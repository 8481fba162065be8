//! Command-line front end: matrix generation, single solves, certified
//! runs, and the named experiments.
//!
//! Exit codes: 0 success, 2 invalid parameters or usage, 3 I/O or parse
//! failure, 4 certification failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Complex;

use wcgmres::crossiter::{cross_iterations_1, cross_iterations_2};
use wcgmres::error::Error;
use wcgmres::experiments::{run_experiment, ExperimentConfig, ExperimentName, SolutionRecord};
use wcgmres::idealsolver::{solve_ideal, IdealConfig};
use wcgmres::krylov::{gmres_residual, gmres_residual_complex, CoeffField};
use wcgmres::matgen::{
    block_diag_double, gen_alternating_bidiagonal, gen_block_coupled, gen_jordan, gen_toh,
    read_matrix, read_vector, write_matrix, TohParams,
};
use wcgmres::wcsolver::{certify_worst_case, solve_worst_case, WcConfig};

#[derive(Parser)]
#[command(name = "wcgmres", version, about = "Worst-case and ideal GMRES computations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a matrix from one of the built-in families.
    Gen(GenArgs),
    /// Run a single computation on a matrix file.
    Solve(SolveArgs),
    /// Run a named experiment, emitting CSV/JSON artifacts.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Toh,
    Jordan,
    AltBidiag,
    BlockCoupled,
    BlockDouble,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Coupling weight (toh, block-coupled).
    #[arg(long)]
    omega: Option<f64>,
    /// Superdiagonal parameter.
    #[arg(long)]
    eps: Option<f64>,
    /// Size parameter (jordan: n, alt-bidiag: n, block-coupled: block size).
    #[arg(long)]
    n: Option<usize>,
    /// Diagonal value (jordan).
    #[arg(long)]
    lambda: Option<f64>,
    /// Input matrix to double (block-double).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(subcommand)]
    what: SolveCmd,
}

#[derive(Subcommand)]
enum SolveCmd {
    /// GMRES residual for a given right-hand side.
    Gmres {
        matrix: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        rhs: PathBuf,
        /// Coefficient field for the minimization.
        #[arg(long, default_value = "real")]
        field: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified worst-case solve.
    WorstCase {
        matrix: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 4)]
        cross_starts: usize,
        #[arg(long, default_value_t = 25)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ideal GMRES solve.
    Ideal {
        matrix: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross iterations from a random or supplied start.
    CrossIter {
        matrix: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        algorithm: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        /// Start vector file; a seeded random unit vector when absent.
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-certify a stored worst-case solution (exit 4 on failure).
    Certify {
        matrix: PathBuf,
        /// Solution JSON produced by `solve worst-case`.
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name: fig1-cross, fig2-gap, fig3-theta, toh-nonunique,
    /// transpose-audit, field-audit.
    name: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; falls back to $WCGMRES_OUT_DIR, then "artifacts".
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Operator file (transpose-audit, field-audit).
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(short)]
    k: Option<usize>,
    /// Tolerance overrides as key=value, repeatable.
    #[arg(long = "tol", value_parser = parse_key_val)]
    tolerances: Vec<(String, f64)>,
}

fn parse_key_val(s: &str) -> Result<(String, f64), String> {
    let (key, val) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = val.parse().map_err(|e| format!("bad value in {s:?}: {e}"))?;
    Ok((key.to_string(), v))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse { .. } => 3,
        Error::CertificationFailure(_) => 4,
        _ => 2,
    }
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> wcgmres::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n"))?;
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn min_singular_value(a: &nalgebra::DMatrix<f64>) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn cmd_gen(args: &GenArgs) -> wcgmres::Result<()> {
    let need = |opt: Option<f64>, name: &str| {
        opt.ok_or_else(|| Error::ParamOutOfRange(format!("missing --{name} for this family")))
    };
    let need_n = |opt: Option<usize>| {
        opt.ok_or_else(|| Error::ParamOutOfRange("missing --n for this family".into()))
    };
    let a = match args.family {
        Family::Toh => gen_toh(TohParams::new(
            need(args.omega, "omega")?,
            need(args.eps, "eps")?,
        )?),
        Family::Jordan => gen_jordan(
            need_n(args.n)?,
            args.lambda.unwrap_or(1.0),
            args.eps.unwrap_or(1.0),
        )?,
        Family::AltBidiag => gen_alternating_bidiagonal(need_n(args.n)?, need(args.eps, "eps")?)?,
        Family::BlockCoupled => gen_block_coupled(
            need_n(args.n)?,
            need(args.omega, "omega")?,
            need(args.eps, "eps")?,
        )?,
        Family::BlockDouble => {
            let path = args.input.as_ref().ok_or_else(|| {
                Error::ParamOutOfRange("block-double needs --input with the base matrix".into())
            })?;
            block_diag_double(&read_matrix(path)?)
        }
    };
    write_matrix(&a, &args.out)?;
    println!(
        "wrote {}x{} matrix to {} (min singular value {:.6e})",
        a.nrows(),
        a.ncols(),
        args.out.display(),
        min_singular_value(&a)
    );
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> wcgmres::Result<bool> {
    match &args.what {
        SolveCmd::Gmres {
            matrix,
            k,
            rhs,
            field,
            out,
        } => {
            let a = read_matrix(matrix)?;
            let b = read_vector(rhs)?;
            match field.as_str() {
                "real" => {
                    let r = gmres_residual(&a, &b, *k)?;
                    let text = serde_json::json!({
                        "k": k,
                        "residual_norm": r.residual_norm,
                        "ortho_defect": r.ortho_defect,
                        "degenerate": r.degenerate,
                        "coeffs": r.coeffs.as_slice(),
                    });
                    write_or_print(out.as_ref(), &serde_json::to_string_pretty(&text).unwrap())?;
                    println!(
                        "gmres k={k}: residual_norm = {:.12e}, ortho_defect = {:.3e}",
                        r.residual_norm, r.ortho_defect
                    );
                }
                "complex" => {
                    let bc = b.map(|x| Complex::new(x, 0.0));
                    let r = gmres_residual_complex(&a, &bc, *k, CoeffField::Complex)?;
                    println!(
                        "gmres k={k} (complex coefficients): residual_norm = {:.12e}",
                        r.residual_norm
                    );
                }
                other => {
                    return Err(Error::ParamOutOfRange(format!(
                        "unknown field {other:?}; expected real or complex"
                    )))
                }
            }
            Ok(true)
        }
        SolveCmd::WorstCase {
            matrix,
            k,
            starts,
            cross_starts,
            sweeps,
            seed,
            threads,
            out,
        } => {
            let a = read_matrix(matrix)?;
            let mut cfg = WcConfig::new(*seed);
            cfg.n_random_starts = *starts;
            cfg.n_cross_starts = *cross_starts;
            cfg.cross_sweeps = *sweeps;
            cfg.threads = *threads;
            let sol = solve_worst_case(&a, *k, &cfg)?;
            let record = SolutionRecord::from_solution(&sol, *k, *seed);
            let text = serde_json::to_string_pretty(&record).unwrap();
            write_or_print(out.as_ref(), &text)?;
            println!(
                "worst-case k={k}: psi = {:.12}, grad_v = {:.3e}, converged = {}",
                sol.psi, sol.grad_v_norm, sol.converged
            );
            Ok(true)
        }
        SolveCmd::Ideal { matrix, k, seed, out } => {
            let a = read_matrix(matrix)?;
            let sol = solve_ideal(&a, *k, &IdealConfig::new(*seed))?;
            let text = serde_json::json!({
                "k": k,
                "phi": sol.phi,
                "coeffs": sol.coeffs.as_slice(),
                "sigma_gap": sol.sigma_gap,
                "subgrad_norm": sol.subgrad_norm,
                "iterations": sol.iterations,
                "converged": sol.converged,
            });
            write_or_print(out.as_ref(), &serde_json::to_string_pretty(&text).unwrap())?;
            println!(
                "ideal k={k}: phi = {:.12}, subgrad_norm = {:.3e}",
                sol.phi, sol.subgrad_norm
            );
            Ok(true)
        }
        SolveCmd::CrossIter {
            matrix,
            k,
            algorithm,
            seed,
            tol,
            max_iter,
            start,
            out,
        } => {
            let a = read_matrix(matrix)?;
            let b0 = match start {
                Some(path) => read_vector(path)?,
                None => {
                    use rand::{Rng, SeedableRng};
                    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(*seed);
                    let v = nalgebra::DVector::from_fn(a.nrows(), |_, _| {
                        rng.sample::<f64, _>(rand_distr::StandardNormal)
                    });
                    let norm = v.norm();
                    v / norm
                }
            };
            let trace = match algorithm {
                1 => cross_iterations_1(&a, &b0, *k, *tol, *max_iter)?,
                2 => cross_iterations_2(&a, &b0, *k, *tol, *max_iter)?,
                other => {
                    return Err(Error::ParamOutOfRange(format!(
                        "algorithm must be 1 or 2, got {other}"
                    )))
                }
            };
            if let Some(path) = out {
                trace.write_csv(path)?;
            }
            println!(
                "cross iterations (algorithm {algorithm}): {} sweeps, converged = {}, final value = {:.12}",
                trace.iterations,
                trace.converged,
                trace.limit_value()
            );
            Ok(true)
        }
        SolveCmd::Certify {
            matrix,
            solution,
            tol,
            seed,
        } => {
            let a = read_matrix(matrix)?;
            let text = std::fs::read_to_string(solution)?;
            let record: SolutionRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                msg: format!("solution json: {e}"),
            })?;
            let sol = record.to_solution();
            let report = certify_worst_case(&a, &sol, record.k, &WcConfig::new(*seed), *tol)?;
            println!(
                "certify k={}: singvec_residual = {:.3e} ({}), cross_equality = {:.3e} ({}), \
                 chain = {}, transpose_gap = {:.3e} ({}), singular_index = {}",
                record.k,
                report.singvec_residual,
                report.singvec_pass,
                report.cross_equality_defect,
                report.cross_equality_pass,
                report.chain_pass,
                report.transpose_gap,
                report.transpose_pass,
                report.singular_index,
            );
            Ok(report.pass)
        }
    }
}

fn cmd_run(args: &RunArgs) -> wcgmres::Result<bool> {
    let name: ExperimentName = args.name.parse()?;
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("WCGMRES_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("artifacts"))
        .join(name.to_string());
    let mut cfg = ExperimentConfig::new(name, args.seed, out_dir.clone());
    cfg.matrix_path = args.matrix.clone();
    cfg.k = args.k;
    cfg.tolerances = args
        .tolerances
        .iter()
        .cloned()
        .collect::<BTreeMap<String, f64>>();
    let outcome = run_experiment(&cfg)?;
    println!(
        "{name}: {} ({} artifacts) -> {}",
        outcome.summary,
        outcome.artifacts.len(),
        out_dir.display()
    );
    if !outcome.certified {
        eprintln!("{name}: certification FAILED");
    }
    Ok(outcome.certified)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Gen(args) => cmd_gen(args).map(|_| true),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Run(args) => cmd_run(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
