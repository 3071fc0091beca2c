//! Dirichlet eigenvalues of -y'' + q y = lambda y on [0, 1].
//!
//! Exercises the shooting eigensolver: the free spectrum against its
//! closed form, a constant shift, eigenfunctions against their exact
//! shapes, the first-order response of an eigenvalue to a potential
//! perturbation (its derivative is the squared eigenfunction), and the
//! CSV round trip used by the command-line `eigs` subcommand.
//!
//! Run with: cargo run --example eigenvalue_sums

use std::f64::consts::PI;

use slcrit::spectral::{
    dirichlet_eigs, eigen_sum, eigenfunction, frechet_check, read_potential_csv,
    write_potential_csv, PotentialGrid,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 2048;

    println!("== free spectrum: lambda_i = (i pi)^2 ==\n");
    let zero = PotentialGrid::zero(n, 2.0)?;
    let eigs = dirichlet_eigs(&zero, 5)?;
    println!("i   computed              exact                 rel-err");
    for (i, lambda) in eigs.iter().enumerate() {
        let exact = ((i + 1) as f64 * PI).powi(2);
        let rel = (lambda - exact).abs() / exact;
        println!("{}   {:<20.12}  {:<20.12}  {:.1e}", i + 1, lambda, exact, rel);
        assert!(rel < 1e-6);
    }
    println!("sum of first 2: {}  (5 pi^2 = {})", eigen_sum(&zero, 2)?, 5.0 * PI * PI);

    println!("\n== constant potentials shift the whole spectrum ==\n");
    let shifted = PotentialGrid::constant(n, 2.0, 7.25)?;
    for (i, (a, b)) in dirichlet_eigs(&shifted, 3)?.iter().zip(&eigs).enumerate() {
        println!("lambda_{}(q = 7.25) - lambda_{}(0) = {:.10}", i + 1, i + 1, a - b);
        assert!((a - b - 7.25).abs() < 1e-6);
    }

    println!("\n== eigenfunctions of the free problem are sine modes ==\n");
    for i in 1..=3 {
        let pair = eigenfunction(&zero, i)?;
        let mut worst = 0.0f64;
        for (j, &val) in pair.eigenfunction.iter().enumerate() {
            let x = j as f64 / n as f64;
            let exact = (2.0f64).sqrt() * (i as f64 * PI * x).sin();
            worst = worst.max((val - exact).abs());
        }
        println!("mode {i}: nodes = {}, max deviation from sqrt(2) sin({i} pi x) = {:.1e}",
            pair.node_count(), worst);
        assert_eq!(pair.node_count(), i - 1);
        assert!(worst < 1e-5);
    }

    println!("\n== eigenvalue derivative = squared eigenfunction ==\n");
    let q = PotentialGrid::from_fn(n, 2.0, |x| 3.0 * (2.0 * PI * x).sin() - 1.0)?;
    let xi = PotentialGrid::from_fn(n, 2.0, |x| (PI * x).cos())?;
    for m in 1..=2 {
        let (fd, analytic) = frechet_check(&q, m, &xi, 1e-5)?;
        println!("m = {m}: finite-difference {fd:.10} vs <xi, E_m^2> {analytic:.10}");
        assert!((fd - analytic).abs() < 1e-5);
    }

    println!("\n== CSV round trip ==\n");
    let mut buf = Vec::new();
    write_potential_csv(&q, &mut buf)?;
    let back = read_potential_csv(buf.as_slice(), 2.0)?;
    let max_diff = q
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("wrote {} bytes, parsed back, max round-trip error {max_diff:.1e}", buf.len());
    assert!(max_diff == 0.0, "17 significant digits round-trip exactly");
    Ok(())
}
