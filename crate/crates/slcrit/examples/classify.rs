//! Decide meromorphic integrability across the parameter space.
//!
//! Walks the (k, mu) landscape with exact rational arithmetic: the
//! integrable families (k = 2 with any frequencies; equal frequencies at
//! any k), non-integrable frequency ratios at k >= 3 and the exceptional
//! ratios that survive the necessary condition, and the spectral-gap
//! systems that reduce to this family with coupling degree 2n.
//!
//! Run with: cargo run --example classify

use slcrit::exact::parse_ratio;
use slcrit::galois::{classify_exact, classify_gap_system, truth_table, Status};

fn show(k: u32, epsilon: i32, mu: &[&str]) -> Result<(), Box<dyn std::error::Error>> {
    let mu: Vec<_> = mu.iter().map(|s| parse_ratio(s)).collect::<Result<_, _>>()?;
    let verdict = classify_exact(k, epsilon, &mu)?;
    println!("{}", verdict.to_report());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("== k = 2 is integrable for every frequency vector ==\n");
    show(2, -1, &["1/3", "2", "-7/5"])?;

    println!("== equal frequencies are integrable at every k ==\n");
    show(6, -1, &["5/2", "5/2", "5/2"])?;

    println!("== distinct frequencies at k >= 3 are generically obstructed ==\n");
    show(3, -1, &["1", "2"])?;

    println!("== a frequency ratio that passes the necessary condition ==\n");
    // ratio 9 = (k - 1)^2 + 2(k - 1) + 1 at k = 3 defeats the ratio test,
    // so the verdict must cite a different obstruction or certify further.
    show(3, -1, &["1", "9"])?;

    println!("== spectral-gap critical systems (coupling degree 2n) ==\n");
    for n in [1u32, 2, 3] {
        let verdict = classify_gap_system(n, &parse_ratio("1")?, &parse_ratio("2")?)?;
        println!("gap index n = {n}:");
        println!("{}", verdict.to_report());
    }

    println!("== truth table over a small grid ==\n");
    println!("k\\mu  equal   distinct");
    for k in 2..=6 {
        let equal = truth_table(k, &[parse_ratio("1")?, parse_ratio("1")?]);
        let distinct = truth_table(k, &[parse_ratio("1")?, parse_ratio("2")?]);
        let word = |yes: bool| if yes { "yes" } else { "no " };
        println!("{k}     {}     {}", word(equal), word(distinct));
    }

    // The full classifier agrees with the closed-form table everywhere.
    for k in 2..=6 {
        for mu in [["1", "1"], ["1", "2"]] {
            let mu: Vec<_> = mu.iter().map(|s| parse_ratio(s)).collect::<Result<_, _>>()?;
            let verdict = classify_exact(k, -1, &mu)?;
            let expect = truth_table(k, &mu);
            assert_eq!(matches!(verdict.status, Status::Integrable), expect);
        }
    }
    println!("\nclassifier agrees with the closed-form table on the grid above");
    Ok(())
}
