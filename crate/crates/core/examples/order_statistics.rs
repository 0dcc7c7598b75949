//! Sorted uniform samples concentrate around their expected positions,
//! which fall inside the matching grid cells.

use rgg_spectra::concentration::{beta_subgaussian_tail, deviation_experiment, multiindex_expectation, order_stat_expectation};
use rgg_spectra::ordering::interval_bounds;

fn main() -> rgg_spectra::Result<()> {
    println!("E[X^(k)] for n = 5: {:?}", (1..=5).map(|k| order_stat_expectation(k, 5)).collect::<Result<Vec<_>, _>>()?);

    let (m, d) = (4, 2);
    println!("\nd = {d}, m = {m}: expected coordinates and their cells");
    for i in 1..=m {
        for j in 1..=m {
            let e1 = multiindex_expectation(&[i, j], 1, m, d)?;
            let e2 = multiindex_expectation(&[i, j], 2, m, d)?;
            let (lo1, hi1) = interval_bounds(i, m);
            let (lo2, hi2) = interval_bounds(j, m);
            println!("  ({i},{j})  ({e1:+.4}, {e2:+.4})  in [{lo1:+.2},{hi1:+.2}) x [{lo2:+.2},{hi2:+.2})");
        }
    }

    let n = 10_000.0;
    println!("\nBeta tail bound for rank k of n = {n}:");
    for t in [0.005, 0.01, 0.02, 0.04] {
        println!("  P(|U - EU| > {t}) <= {:.3e}", beta_subgaussian_tail(5000.0, n - 5000.0 + 1.0, t)?);
    }

    for (n, d) in [(10_000, 1), (100_000, 1), (4096, 2)] {
        let rep = deviation_experiment(n, d, 10, 1)?;
        let worst = rep.max_deviation.iter().copied().fold(0.0, f64::max);
        println!(
            "n = {n:>6}, d = {d}: worst deviation {worst:.4}, threshold {:.4}, pass fraction {}",
            rep.threshold, rep.pass_fraction
        );
    }
    Ok(())
}
