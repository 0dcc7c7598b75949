//! Spectral gap of the normalized Laplacian across radii: below 1/2 for
//! short radii, about 1/2 at r = 1, above 1/2 for long radii.

use rgg_spectra::eigen::DEFAULT_TOL;
use rgg_spectra::experiments::gap_sweep;

fn main() -> rgg_spectra::Result<()> {
    let (d, n, trials, seed) = (1, 800, 3, 7);
    let radii = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75];

    let reports = gap_sweep(d, n, &radii, trials, seed, DEFAULT_TOL)?;
    println!("d = {d}, n = {n}, {trials} trials per radius");
    println!("{:>6} {:>10} {:>10} {:>10}  regime", "r", "mean", "min", "max");
    for rep in &reports {
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>10.4}  {:?}{}",
            rep.r,
            rep.summary.mean,
            rep.summary.min,
            rep.summary.max,
            rep.regime,
            if rep.in_regime() { "" } else { " (outside window)" }
        );
    }
    Ok(())
}
