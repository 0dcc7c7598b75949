//! The d-dimensional kernel factors over coordinates, so its spectrum is
//! all d-fold products of the 1-D eigenvalues. At r = 1 the top of it is
//! 2^-k repeated C(d, k) times.

use rgg_spectra::eigen::DEFAULT_TOL;
use rgg_spectra::experiments::binomial;
use rgg_spectra::kernel::{nystrom_spectrum, tensor_spectrum};

fn main() -> rgg_spectra::Result<()> {
    let one_d = nystrom_spectrum(1.0, 1000, DEFAULT_TOL)?;

    for d in 1..=3 {
        let k_max = 1usize << d;
        let t = tensor_spectrum(&one_d, d, k_max + 2)?;
        println!("d = {d}");
        let mut rank = 0;
        for k in 0..=d {
            for _ in 0..binomial(d, k) {
                println!("  {:>8.5}   expected {:.5}", t.values()[rank], 0.5f64.powi(k as i32));
                rank += 1;
            }
        }
        for v in &t.values()[rank..] {
            println!("  {v:>8.5}");
        }
    }
    Ok(())
}
