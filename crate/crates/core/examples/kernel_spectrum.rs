//! Nyström spectrum of the limiting kernel K_r on [-1,1] for a few radii,
//! with the Hilbert-Schmidt check at r = 1.

use rgg_spectra::eigen::DEFAULT_TOL;
use rgg_spectra::kernel::{hs_norm_squared_k1, nystrom_parity_spectra, nystrom_spectrum, refinement_drift};

fn main() -> rgg_spectra::Result<()> {
    let m = 1000;

    let s = nystrom_spectrum(1.0, m, DEFAULT_TOL)?;
    println!("r = 1, m = {m}");
    for (i, v) in s.values().iter().take(6).enumerate() {
        println!("  lambda_{} = {v:+.6}", i + 1);
    }
    let tail: f64 = s.values()[2..].iter().map(|v| v * v).sum();
    println!("  sum of lambda_i^2 for i >= 3: {tail:.5}");
    println!("  sum of all lambda_i^2: {:.5}   ||K_1||_HS^2: {:.5}", s.sum_sq(), hs_norm_squared_k1());

    // the kernel is symmetric under x -> -x; 1/2 belongs to an odd eigenfunction
    let (even, odd) = nystrom_parity_spectra(1.0, m, DEFAULT_TOL)?;
    println!("  top even: {:.5}   top odd: {:.5}", even.values()[0], odd.values()[0]);
    println!("  drift of top 5 from m = 500 to m = {m}: {:.2e}", refinement_drift(1.0, &[500, m], 5, DEFAULT_TOL)?);

    println!("\nsecond eigenvalue against r:");
    for r in [0.3, 0.5, 0.7, 0.9, 1.0, 1.1, 1.5, 1.9] {
        let s = nystrom_spectrum(r, m, DEFAULT_TOL)?;
        println!("  r = {r:<3}  lambda_2 = {:.4}  lambda_min = {:+.4}", s.values()[1], s.smallest());
    }
    Ok(())
}
