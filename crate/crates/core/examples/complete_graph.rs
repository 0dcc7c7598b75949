//! Near the diameter of the cube every pair is connected, so W is the
//! averaging matrix: one eigenvalue 1 and n-1 zeros.

use rgg_spectra::eigen::DEFAULT_TOL;
use rgg_spectra::experiments::w_spectrum;
use rgg_spectra::geometry::{sample_uniform_cube, Radius};

fn main() -> rgg_spectra::Result<()> {
    let n = 50;
    let cloud = sample_uniform_cube(n, 1, 1)?;

    for r in [0.5, 1.0, 1.5, 1.99] {
        let spec = w_spectrum(&cloud, &Radius::new(r)?, DEFAULT_TOL)?;
        let near_zero = spec.count_in(-1e-8, 1e-8);
        println!(
            "r = {r:<4}  lambda_1 = {:.12}  lambda_2 = {:+.6}  eigenvalues within 1e-8 of 0: {near_zero}/{}",
            spec.values()[0],
            spec.values()[1],
            n - 1
        );
    }
    Ok(())
}
