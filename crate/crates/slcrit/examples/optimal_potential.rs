//! Extremize the sum of the first m Dirichlet eigenvalues over an Lp
//! sphere of potentials, then extract and verify the critical system.
//!
//! Projected gradient ascent/descent on the sphere `||q||_p = r`; at a
//! critical point the potential is proportional to a power of the sum of
//! squared eigenfunctions, and rescaled eigenfunctions solve a system of
//! m coupled oscillators with polynomial coupling whose exponent is the
//! conjugate of p. The verifier checks all of that pointwise, and the
//! minimizer/maximizer values sandwich the sum at random potentials on
//! the same sphere.
//!
//! Run with: cargo run --example optimal_potential

use slcrit::optimize::{
    extract_critical, optimize_sum, random_smooth_on_sphere, verify_critical, OptimizeProblem,
    Sense, SolverConfig,
};
use slcrit::spectral::eigen_sum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SolverConfig { restarts: 2, ..SolverConfig::default() };

    let mut extremes = Vec::new();
    for sense in [Sense::Min, Sense::Max] {
        let prob = OptimizeProblem::new(2, 2.0, 1.0, sense)?;
        println!("== {sense}imize lambda_1 + lambda_2 over ||q||_2 = 1 ==\n");
        let outcome = optimize_sum(&prob, &cfg)?;
        print!("{}", outcome.to_report(&prob));

        let sol = extract_critical(&outcome.q, &prob)?;
        println!("\nextracted critical system:");
        println!("  coupling exponent k = p/(p-1) = {}", prob.conjugate());
        println!("  coupling sign epsilon = {:+}", sol.epsilon);
        println!("  frequencies mu = {:?}", sol.mu);
        println!("  multiplier c = {:.6e}", sol.c);

        let report = verify_critical(&sol, &prob);
        print!("\n{}", report.to_report());
        assert!(report.pass, "critical-system verification must pass");
        extremes.push(outcome.value);
        println!();
    }

    println!("== sandwich: random potentials on the sphere stay between ==\n");
    let (lo, hi) = (extremes[0], extremes[1]);
    println!("min value = {lo:.9}");
    println!("max value = {hi:.9}");
    let mut inside = 0;
    for seed in 0..30u64 {
        let q = random_smooth_on_sphere(512, 2.0, 1.0, 1000 + seed)?;
        let s = eigen_sum(&q, 2)?;
        assert!(s >= lo - 1e-6 && s <= hi + 1e-6, "seed {seed}: {s} outside [{lo}, {hi}]");
        if s > lo + 1e-6 && s < hi - 1e-6 {
            inside += 1;
        }
    }
    println!("30 random sphere potentials all landed in [min, max]; {inside} strictly inside");
    Ok(())
}
