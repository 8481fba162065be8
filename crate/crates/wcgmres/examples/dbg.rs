use nalgebra::DVector;
use wcgmres::matgen::{gen_toh, TohParams};

fn main() {
    // replicate the polish loop manually via the public API pieces
    let om = 1.5;
    let eps = 0.05;
    let a = gen_toh(TohParams::new(om, eps).unwrap());
    let alpha = 2.0 * om * om / (4.0 + om * om);
    let sol = wcgmres::idealsolver::solve_ideal(&a, 3, &wcgmres::idealsolver::IdealConfig::new(19)).unwrap();
    let target = DVector::from_vec(vec![0.0, 1.0 - alpha, 0.0]);
    let c = DVector::from_column_slice(sol.coeffs.as_slice());
    println!("final dev = {:.3e}, components {:?}", (&c - &target).norm(), sol.coeffs.as_slice());
    // check the directional derivative at the closed-form optimum along e2
    // and at the solver's point, to see the achievable resolution
    let probe = |c: &DVector<f64>, d: &DVector<f64>, label: &str| {
        let p = wcgmres::krylov::PolyCoeffs::new(c.clone());
        let e = wcgmres::idealsolver::eval_spectral_norm_poly(&a, &p);
        println!("{label}: h = {:.15}, mult = {}, sig = {:?}", e.value, e.multiplicity, &e.sigmas[..2]);
        let _ = d;
    };
    probe(&target, &DVector::zeros(3), "closed form");
    probe(&c, &DVector::zeros(3), "solver");
}
