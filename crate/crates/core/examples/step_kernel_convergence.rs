//! Sorting the sample turns W into a step kernel on cells of [-1,1]^d.
//! The degree function and the kernel approach their limits as n grows.

use rgg_spectra::eigen::{symmetric_eigenvalues, DEFAULT_TOL};
use rgg_spectra::geometry::{sample_uniform_cube, Radius};
use rgg_spectra::graph::w_matrix;
use rgg_spectra::ordering::{convergence_row, coordinate_sort, step_w_matrix};

fn main() -> rgg_spectra::Result<()> {
    let r = Radius::new(1.0)?;

    // reordering is a permutation similarity, so nothing changes in the spectrum
    let cloud = sample_uniform_cube(400, 2, 3)?;
    let grid = coordinate_sort(&cloud, 20)?;
    let step = step_w_matrix(&grid, &r)?;
    let a = symmetric_eigenvalues(&step.matrix, DEFAULT_TOL)?;
    let b = symmetric_eigenvalues(&w_matrix(&cloud, &r)?, DEFAULT_TOL)?;
    println!("d = 2, n = 400: max |spec(step) - spec(W)| = {:.2e}\n", a.max_abs_diff(&b)?);

    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "n", "sup_H", "l1", "boundary", "violations");
    for n in [125, 250, 500, 1000, 2000] {
        let grid = coordinate_sort(&sample_uniform_cube(n, 1, 11)?, n)?;
        let row = convergence_row(&grid, &r, 0.1, 2)?;
        println!(
            "{:>6} {:>10.5} {:>10.5} {:>10.4} {:>10}",
            n, row.sup_h, row.l1_dist, row.boundary_fraction, row.violations
        );
    }
    Ok(())
}
