//! Order-statistic expectations and concentration of the block-sorted sample
//! around them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{sample_uniform_cube, trial_seed};
use crate::ordering::{checked_power, coordinate_sort, integer_root};

/// `E[X^(k)] = -1 + 2k/(n+1)` for the `k`-th smallest of `n` uniforms on
/// `[-1,1]`.
pub fn order_stat_expectation(k: usize, n: usize) -> Result<f64> {
    if k == 0 || k > n {
        return invalid(format!("rank {k} outside 1..={n}"));
    }
    Ok(-1.0 + 2.0 * k as f64 / (n as f64 + 1.0))
}

/// Expected `k`-th coordinate (1-based `k`) of the point with multi-index
/// `idx` after block sorting `m^d` uniform points.
///
/// After the first `k-1` sorting steps the block holding `X^(𝐢)` has
/// `a·m` points with `a = m^{d-k}`, and the point's `k`-th coordinate is,
/// on average over its sub-block, the order statistic of rank
/// `(i_k - 1)a + (a+1)/2` among them.
pub fn multiindex_expectation(idx: &[usize], k: usize, m: usize, d: usize) -> Result<f64> {
    if idx.len() != d {
        return invalid(format!("multi-index of length {} in dimension {d}", idx.len()));
    }
    if k == 0 || k > d {
        return invalid(format!("coordinate {k} outside 1..={d}"));
    }
    let ik = idx[k - 1];
    if ik == 0 || ik > m {
        return invalid(format!("index {ik} outside 1..={m}"));
    }
    let a = checked_power(m, d - k)
        .ok_or_else(|| crate::error::Error::InvalidArgument(format!("{m}^{} overflows", d - k)))?
        as f64;
    let i = ik as f64;
    Ok(-1.0 + (2.0 * i * a - a + 1.0) / (a * m as f64 + 1.0))
}

/// Two-sided sub-Gaussian tail bound `min(1, 2 exp(-t²/2σ²))` for a
/// `Beta(α, β)` variable, with proxy variance `σ² = 1/(4(α+β+1))`.
pub fn beta_subgaussian_tail(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0 && t > 0.0) {
        return invalid(format!("alpha = {alpha}, beta = {beta}, t = {t} must all be positive"));
    }
    let sigma_sq = 1.0 / (4.0 * (alpha + beta + 1.0));
    Ok((2.0 * (-t * t / (2.0 * sigma_sq)).exp()).min(1.0))
}

/// Per-trial worst deviation of the sorted sample from its expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    /// `max_𝐢 ‖X^(𝐢) - E[X^(𝐢)]‖∞` for each trial.
    pub max_deviation: Vec<f64>,
    /// `n^{-1/(3d)}`.
    pub threshold: f64,
    /// Fraction of trials with `max_deviation <= threshold`.
    pub pass_fraction: f64,
}

/// Samples `trials` clouds of `n = m^d` points (trial `t` uses seed
/// `seed + t`), block-sorts each, and records how far the sorted points
/// stray from their expectations.
pub fn deviation_experiment(n: usize, d: usize, trials: usize, seed: u64) -> Result<DeviationReport> {
    let Some(m) = integer_root(n, d) else {
        return invalid(format!("n = {n} is not a perfect power of order {d}"));
    };
    if trials == 0 {
        return invalid("trials must be >= 1");
    }
    // expectations depend only on (k, i_k)
    let table: Vec<Vec<f64>> = (1..=d)
        .map(|k| {
            (1..=m)
                .map(|i| {
                    let mut idx = vec![1; d];
                    idx[k - 1] = i;
                    multiindex_expectation(&idx, k, m, d)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let max_deviation = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cloud = sample_uniform_cube(n, d, trial_seed(seed, t))?;
            let grid = coordinate_sort(&cloud, m)?;
            let mut worst: f64 = 0.0;
            for flat in 0..n {
                let idx = grid.multi_index(flat);
                let x = grid.sorted_point(flat);
                for k in 0..d {
                    worst = worst.max((x[k] - table[k][idx[k] - 1]).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let threshold = (n as f64).powf(-1.0 / (3.0 * d as f64));
    let passed = max_deviation.iter().filter(|&&v| v <= threshold).count();
    Ok(DeviationReport {
        n,
        d,
        trials,
        seed,
        pass_fraction: passed as f64 / trials as f64,
        max_deviation,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rng_from_seed;
    use crate::ordering::interval_of;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn order_stat_examples() {
        assert_eq!(order_stat_expectation(1, 1).unwrap(), 0.0);
        assert_eq!(order_stat_expectation(3, 5).unwrap(), 0.0);
        assert_eq!(order_stat_expectation(2, 3).unwrap(), 0.0);
        assert_eq!(order_stat_expectation(1, 3).unwrap(), -0.5);
        assert!(order_stat_expectation(0, 3).is_err());
        assert!(order_stat_expectation(4, 3).is_err());
    }

    #[test]
    fn multiindex_examples() {
        for m in 1..12 {
            for i in 1..=m {
                assert_eq!(
                    multiindex_expectation(&[i], 1, m, 1).unwrap(),
                    order_stat_expectation(i, m).unwrap()
                );
            }
        }
        let v = multiindex_expectation(&[1, 2], 1, 3, 2).unwrap();
        assert!((v + 0.6).abs() < 1e-15);
        for q in 1..=7 {
            let v = multiindex_expectation(&[3, q], 2, 7, 2).unwrap();
            assert!((v - (-1.0 + 2.0 * q as f64 / 8.0)).abs() < 1e-15);
        }
        assert!(multiindex_expectation(&[0, 1], 1, 3, 2).is_err());
        assert!(multiindex_expectation(&[4, 1], 1, 3, 2).is_err());
        assert!(multiindex_expectation(&[1, 1], 3, 3, 2).is_err());
    }

    #[test]
    fn multiindex_expectation_matches_simulation() {
        // d=2, m=3: mean of each sorted coordinate over many samples
        let (m, d, trials) = (3, 2, 20_000);
        let mut sums = vec![0.0; 9 * 2];
        let mut sq = vec![0.0; 9 * 2];
        for t in 0..trials {
            let cloud = sample_uniform_cube(9, d, 1000 + t).unwrap();
            let grid = coordinate_sort(&cloud, m).unwrap();
            for flat in 0..9 {
                for k in 0..2 {
                    let v = grid.sorted_point(flat)[k];
                    sums[flat * 2 + k] += v;
                    sq[flat * 2 + k] += v * v;
                }
            }
        }
        let grid = coordinate_sort(&sample_uniform_cube(9, d, 0).unwrap(), m).unwrap();
        for flat in 0..9 {
            let idx = grid.multi_index(flat);
            for k in 0..2 {
                let tf = trials as f64;
                let mean = sums[flat * 2 + k] / tf;
                let var = sq[flat * 2 + k] / tf - mean * mean;
                let se = (var / tf).sqrt();
                let expect = multiindex_expectation(&idx, k + 1, m, d).unwrap();
                assert!((mean - expect).abs() <= 4.0 * se, "{idx:?} k={k}: {mean} vs {expect}");
            }
        }
    }

    #[test]
    fn order_stat_means_match_simulation() {
        let (n, trials) = (9, 20_000);
        let mut rng = rng_from_seed(77);
        let mut sums = [0.0; 9];
        let mut sq = [0.0; 9];
        let mut xs = [0.0; 9];
        for _ in 0..trials {
            for x in xs.iter_mut() {
                *x = 2.0 * rng.random::<f64>() - 1.0;
            }
            xs.sort_by(f64::total_cmp);
            for k in 0..n {
                sums[k] += xs[k];
                sq[k] += xs[k] * xs[k];
            }
        }
        let tf = trials as f64;
        for k in 0..n {
            let mean = sums[k] / tf;
            let se = ((sq[k] / tf - mean * mean) / tf).sqrt();
            let expect = order_stat_expectation(k + 1, n).unwrap();
            assert!((mean - expect).abs() <= 3.0 * se, "k={}: {mean} vs {expect}", k + 1);
        }
    }

    /// Exact check in integer arithmetic that the expectation lies in
    /// `[-1 + 2(i-1)/m, -1 + 2i/m)`.
    fn in_cell_exact(i: u128, a: u128, m: u128) -> bool {
        // 1 + E = (2ia - a + 1) / (am + 1)
        let num = 2 * i * a - a + 1;
        let den = a * m + 1;
        2 * (i - 1) * den <= num * m && num * m < 2 * i * den
    }

    #[test]
    fn expectations_lie_in_their_cells() {
        for d in 1..=3usize {
            for m in 1..=20usize {
                for k in 1..=d {
                    let a = checked_power(m, d - k).unwrap();
                    for i in 1..=m {
                        let mut idx = vec![1; d];
                        idx[k - 1] = i;
                        let e = multiindex_expectation(&idx, k, m, d).unwrap();
                        assert!(in_cell_exact(i as u128, a as u128, m as u128));
                        assert_eq!(interval_of(e, m).unwrap(), i, "d={d} m={m} k={k} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn tail_examples() {
        assert!(beta_subgaussian_tail(1.0, 1.0, 50.0).unwrap() < 1e-300);
        assert_eq!(beta_subgaussian_tail(1.0, 1.0, 1e-4).unwrap(), 1.0);
        // the proxy variance only sees α + β
        let n = 40.0;
        let a = beta_subgaussian_tail(1.0, n, 0.3).unwrap();
        let b = beta_subgaussian_tail(17.0, n - 16.0, 0.3).unwrap();
        assert_eq!(a, b);
        let expect = 2.0 * (-0.09 * 4.0 * (n + 2.0) / 2.0f64).exp();
        assert!((a - expect).abs() < 1e-15);
        assert!(beta_subgaussian_tail(0.0, 1.0, 1.0).is_err());
        assert!(beta_subgaussian_tail(1.0, 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn tail_is_monotone(a in 0.1f64..50.0, b in 0.1f64..50.0, t in 0.01f64..2.0, dt in 0.0f64..1.0, ds in 0.0f64..20.0) {
            let base = beta_subgaussian_tail(a, b, t).unwrap();
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert!(beta_subgaussian_tail(a, b, t + dt).unwrap() <= base);
            prop_assert!(beta_subgaussian_tail(a + ds, b, t).unwrap() <= base);
        }
    }

    #[test]
    fn deviation_examples() {
        let rep = deviation_experiment(1, 1, 1, 3).unwrap();
        assert_eq!(rep.threshold, 1.0);
        assert!(rep.max_deviation[0] <= 1.0);
        assert_eq!(rep.pass_fraction, 1.0);

        let rep = deviation_experiment(20_000, 1, 10, 5).unwrap();
        assert_eq!(rep.pass_fraction, 1.0);
        assert_eq!(rep.max_deviation.len(), 10);
        assert!(deviation_experiment(4000, 2, 1, 0).is_err());
        assert!(deviation_experiment(16, 2, 0, 0).is_err());
    }

    #[test]
    fn deviation_report_round_trips() {
        let rep = deviation_experiment(64, 2, 3, 1).unwrap();
        assert!((0.0..=1.0).contains(&rep.pass_fraction));
        let json = serde_json::to_string(&rep).unwrap();
        let back: DeviationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }

    /// The calibrated d = 2 example. At n = 4096 the sup deviation of the
    /// second coordinate (a 64-point order statistic in each block) is
    /// around 0.4, well above n^{-1/6} ≈ 0.25, so this does not hold at
    /// desk scale.
    #[test]
    #[ignore = "fails at n = 4096: the d = 2 threshold is only reached asymptotically"]
    fn deviation_two_dimensional_desk_scale() {
        let rep = deviation_experiment(4096, 2, 50, 1).unwrap();
        assert!(rep.pass_fraction >= 0.95, "{rep:?}");
    }
}
