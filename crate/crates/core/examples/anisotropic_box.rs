//! Box neighbourhoods with a different radius along each axis. The kernel
//! still factors, so the spectrum comes from the per-axis 1-D spectra.

use rgg_spectra::eigen::DEFAULT_TOL;
use rgg_spectra::experiments::w_spectrum;
use rgg_spectra::geometry::{sample_uniform_cube, Radius};
use rgg_spectra::kernel::{nystrom_spectrum, tensor_spectrum_mixed};

fn main() -> rgg_spectra::Result<()> {
    let m = 1000;
    for radii in [[0.5, 1.5], [1.2, 1.5], [1.0, 1.0]] {
        let a = nystrom_spectrum(radii[0], m, DEFAULT_TOL)?;
        let b = nystrom_spectrum(radii[1], m, DEFAULT_TOL)?;
        let t = tensor_spectrum_mixed(&[&a, &b], 5)?;

        let cloud = sample_uniform_cube(900, 2, 2)?;
        let g = w_spectrum(&cloud, &Radius::anisotropic(radii.to_vec())?, DEFAULT_TOL)?;

        println!("r = {radii:?}");
        println!("  kernel top 5: {:?}", t.values().iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
        println!("  graph  top 5: {:?}", g.values()[..5].iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    }
    Ok(())
}
