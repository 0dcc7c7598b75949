//! Cauchy interlacing between a graph and its sub-samples, used to pass
//! between sample sizes that are not perfect powers.

use rgg_spectra::eigen::{symmetric_eigenvalues, DEFAULT_TOL};
use rgg_spectra::experiments::{bridge_general_n, interlacing_check};
use rgg_spectra::geometry::{sample_uniform_cube, Radius};
use rgg_spectra::graph::{principal_submatrix, w_matrix};

fn main() -> rgg_spectra::Result<()> {
    let r = Radius::new(1.0)?;

    let w = w_matrix(&sample_uniform_cube(200, 2, 5)?, &r)?;
    let keep: Vec<usize> = (0..200).filter(|i| i % 3 != 0).collect();
    let parent = symmetric_eigenvalues(&w, DEFAULT_TOL)?;
    let child = symmetric_eigenvalues(&principal_submatrix(&w, &keep)?, DEFAULT_TOL)?;
    let rep = interlacing_check(&parent, &child, 1e-9)?;
    println!("n = 200, keep {}: interlaced = {}, worst violation {:.1e}\n", keep.len(), rep.holds, rep.worst_violation);

    // 500 sits between 22^2 = 484 and 23^2 = 529
    let bridge = bridge_general_n(500, 2, &r, &[0.35, 0.45], 9, DEFAULT_TOL)?;
    println!("n = 500 between {} and {}", bridge.lower_size, bridge.upper_size);
    for (label, rows) in [("principal", &bridge.principal), ("resampled", &bridge.resampled)] {
        for row in rows {
            println!(
                "  {label:<9}  #|lambda| > {}: {} <= {} <= {}  {}",
                row.lambda,
                row.lower,
                row.middle,
                row.upper,
                if row.holds { "ok" } else { "broken" }
            );
        }
    }
    Ok(())
}
