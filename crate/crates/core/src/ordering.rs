//! Coordinate-wise block ordering of a sample of `n = m^d` points and the
//! step kernels built on it.
//!
//! Step 1 sorts all points by their first coordinate and cuts the result into
//! `m` consecutive blocks of `m^{d-1}` points. Step `k` sorts every block
//! produced by step `k-1` by coordinate `k` and cuts it into `m` sub-blocks.
//! After `d` steps each point carries a multi-index `𝐢 ∈ {1..m}^d` (its
//! block path) and is associated with the cell
//! `L_𝐢 = L_{i_1} × … × L_{i_d}`, where `L_i = [-1 + 2(i-1)/m, -1 + 2i/m)`
//! (the last cell is closed).
//!
//! The step kernel `K_{n,r}` equals `n · w_{𝐢𝐣}` on `L_𝐢 × L_𝐣`, where `w`
//! is the normalized adjacency of the reordered points; its integral
//! operator has the same spectrum as `W_{n,r}`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::export::{fmt17, write_csv_rows};
use crate::geometry::{connected, PointCloud, Radius};
use crate::graph::{w_matrix, SymmetricMatrix};
use crate::kernel::profile;

/// `m^d`, or `None` on overflow.
pub fn checked_power(m: usize, d: usize) -> Option<usize> {
    (0..d).try_fold(1usize, |acc, _| acc.checked_mul(m))
}

/// The `m` with `m^d = n`, if there is one.
pub fn integer_root(n: usize, d: usize) -> Option<usize> {
    if n == 0 || d == 0 {
        return None;
    }
    let guess = (n as f64).powf(1.0 / d as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&m| m > 0 && checked_power(m, d) == Some(n))
}

/// A point cloud together with its block ordering.
#[derive(Debug, Clone)]
pub struct SortedGrid {
    m: usize,
    cloud: PointCloud,
    /// `order[flat(𝐢)]` is the index, in the original cloud, of `X^(𝐢)`.
    order: Vec<usize>,
}

impl SortedGrid {
    pub fn side(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    /// Original point indices in lexicographic multi-index order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 1-based multi-index of lexicographic position `flat`.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % self.m + 1;
            rest /= self.m;
        }
        idx
    }

    /// Lexicographic position of a 1-based multi-index.
    pub fn flat_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.dim() {
            return invalid(format!("multi-index of length {} in dimension {}", idx.len(), self.dim()));
        }
        idx.iter().try_fold(0usize, |acc, &i| {
            if i == 0 || i > self.m {
                invalid(format!("index component {i} outside 1..={}", self.m))
            } else {
                Ok(acc * self.m + (i - 1))
            }
        })
    }

    /// `X^(𝐢)` for a 1-based multi-index.
    pub fn point_at(&self, idx: &[usize]) -> Result<&[f64]> {
        Ok(self.sorted_point(self.flat_index(idx)?))
    }

    /// Point at lexicographic position `flat`.
    pub fn sorted_point(&self, flat: usize) -> &[f64] {
        self.cloud.point(self.order[flat])
    }

    /// The reordered cloud.
    pub fn sorted_cloud(&self) -> PointCloud {
        self.cloud
            .select(&self.order)
            .expect("order is a permutation of the cloud")
    }
}

/// Builds the block ordering of `cloud`, which must hold exactly `m^d`
/// points. Ties are broken by original index.
pub fn coordinate_sort(cloud: &PointCloud, m: usize) -> Result<SortedGrid> {
    let d = cloud.dim();
    let n = cloud.len();
    if m == 0 || checked_power(m, d) != Some(n) {
        return invalid(format!("{n} points is not {m}^{d}"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut block = n;
    for k in 0..d {
        for chunk in order.chunks_mut(block) {
            chunk.sort_by(|&a, &b| {
                cloud.point(a)[k]
                    .total_cmp(&cloud.point(b)[k])
                    .then(a.cmp(&b))
            });
        }
        block /= m;
    }
    Ok(SortedGrid {
        m,
        cloud: cloud.clone(),
        order,
    })
}

/// 1-based index of the interval `L_i = [-1 + 2(i-1)/m, -1 + 2i/m)` holding
/// `x`; `x = 1` belongs to the last, closed interval.
pub fn interval_of(x: f64, m: usize) -> Result<usize> {
    if !(-1.0..=1.0).contains(&x) {
        return invalid(format!("coordinate {x} outside [-1,1]"));
    }
    if m == 0 {
        return invalid("m must be >= 1");
    }
    let i = ((x + 1.0) * m as f64 / 2.0).floor() as usize + 1;
    Ok(i.min(m))
}

/// Multi-index of the cell `L_𝐢` containing `x`.
pub fn cell_of(x: &[f64], m: usize) -> Result<Vec<usize>> {
    x.iter().map(|&c| interval_of(c, m)).collect()
}

/// Closed bounds of `L_i` (1-based).
pub fn interval_bounds(i: usize, m: usize) -> (f64, f64) {
    let w = 2.0 / m as f64;
    (-1.0 + (i - 1) as f64 * w, -1.0 + i as f64 * w)
}

/// Step kernel `K_{n,r}` in matrix form: the normalized adjacency of the
/// reordered points. `K_{n,r} = n · matrix[𝐢][𝐣]` on `L_𝐢 × L_𝐣`.
#[derive(Debug, Clone)]
pub struct StepKernel {
    pub grid: SortedGrid,
    pub radius: Radius,
    pub matrix: SymmetricMatrix,
}

/// Normalized adjacency of the reordered cloud; isospectral with the
/// unsorted `W_{n,r}`.
pub fn step_w_matrix(grid: &SortedGrid, r: &Radius) -> Result<StepKernel> {
    let matrix = w_matrix(&grid.sorted_cloud(), r)?;
    Ok(StepKernel {
        grid: grid.clone(),
        radius: r.clone(),
        matrix,
    })
}

/// Degrees of the reordered points, in lexicographic order.
fn sorted_degrees(grid: &SortedGrid, r: &Radius) -> Vec<usize> {
    let n = grid.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.sorted_point(i);
            (0..n).filter(|&j| connected(x, grid.sorted_point(j), r)).count()
        })
        .collect()
}

/// Range of `H_r` over `[lo, hi]` in one coordinate. `H_r` is even and
/// non-increasing in `|x|`.
fn profile_range(lo: f64, hi: f64, r: f64) -> (f64, f64) {
    let nearest = if lo <= 0.0 && hi >= 0.0 {
        0.0
    } else {
        lo.abs().min(hi.abs())
    };
    let farthest = lo.abs().max(hi.abs());
    (profile(farthest, r), profile(nearest, r))
}

/// `sup_x |H_{n,r}(x) - H_r(x)|` where `H_{n,r}` equals `deg(X^(𝐢))/n` on
/// `L_𝐢`.
///
/// On each cell the supremum is exact: `H_r` is a product of even factors
/// that are non-increasing in `|x_k|`, so its range over a box is spanned by
/// the per-axis extremes (cell endpoints, plus `x_k = 0` when the cell
/// straddles it).
pub fn sup_h_distance(grid: &SortedGrid, r: &Radius) -> Result<f64> {
    r.check_dim(grid.dim())?;
    let n = grid.len();
    let m = grid.side();
    let d = grid.dim();
    let deg = sorted_degrees(grid, r);
    let ranges: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|k| {
            (1..=m)
                .map(|i| {
                    let (lo, hi) = interval_bounds(i, m);
                    profile_range(lo, hi, r.along(k))
                })
                .collect()
        })
        .collect();
    Ok((0..n)
        .map(|flat| {
            let idx = grid.multi_index(flat);
            let (mut lo, mut hi) = (1.0, 1.0);
            for (k, &i) in idx.iter().enumerate() {
                let (a, b) = ranges[k][i - 1];
                lo *= a;
                hi *= b;
            }
            let c = deg[flat] as f64 / n as f64;
            (c - lo).abs().max((c - hi).abs())
        })
        .fold(0.0, f64::max))
}

/// Midpoint-rule estimate of `∬ |K_{n,r} - K_r^d| dν_d dν_d`, using `sub`
/// points per cell per axis. Upper-bounds the cut distance.
pub fn l1_kernel_distance(grid: &SortedGrid, r: &Radius, sub: usize) -> Result<f64> {
    r.check_dim(grid.dim())?;
    if sub == 0 {
        return invalid("sub must be >= 1");
    }
    let n = grid.len();
    let m = grid.side();
    let d = grid.dim();
    let deg = sorted_degrees(grid, r);
    let inv_sqrt_deg: Vec<f64> = deg.iter().map(|&v| 1.0 / (v as f64).sqrt()).collect();

    // quadrature nodes, grouped by cell in lexicographic cell order
    let per_cell = sub.pow(d as u32);
    let offsets: Vec<f64> = (0..sub).map(|s| (s as f64 + 0.5) / sub as f64).collect();
    let mut nodes = Vec::with_capacity(n * per_cell * d);
    let mut node_cell = Vec::with_capacity(n * per_cell);
    let mut node_scale = Vec::with_capacity(n * per_cell);
    for flat in 0..n {
        let idx = grid.multi_index(flat);
        for q in 0..per_cell {
            let mut rest = q;
            let mut scale = 1.0;
            for (k, &i) in idx.iter().enumerate() {
                let (lo, hi) = interval_bounds(i, m);
                let x = lo + offsets[rest % sub] * (hi - lo);
                rest /= sub;
                scale /= profile(x, r.along(k)).sqrt();
                nodes.push(x);
            }
            node_cell.push(flat);
            node_scale.push(scale);
        }
    }
    let count = node_cell.len();
    let nf = n as f64;
    let total: f64 = (0..count)
        .into_par_iter()
        .map(|a| {
            let xa = &nodes[a * d..(a + 1) * d];
            let ca = node_cell[a];
            let pa = grid.sorted_point(ca);
            let mut acc = 0.0;
            let mut cb_prev = usize::MAX;
            let mut step = 0.0;
            for b in 0..count {
                let cb = node_cell[b];
                if cb != cb_prev {
                    step = if connected(pa, grid.sorted_point(cb), r) {
                        nf * inv_sqrt_deg[ca] * inv_sqrt_deg[cb]
                    } else {
                        0.0
                    };
                    cb_prev = cb;
                }
                let limit = if connected(xa, &nodes[b * d..(b + 1) * d], r) {
                    node_scale[a] * node_scale[b]
                } else {
                    0.0
                };
                acc += (step - limit).abs();
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        // summed in a fixed order so repeated runs agree to the last bit
        .sum();
    Ok(total / (count as f64 * count as f64))
}

/// Cell pairs split by how they sit relative to the connection radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSetReport {
    pub eps: f64,
    /// Pairs whose cells are entirely within distance `r - ε`.
    pub inner_pairs: usize,
    /// Pairs whose cells are entirely beyond distance `r + ε`.
    pub outer_pairs: usize,
    /// Remaining pairs.
    pub boundary_pairs: usize,
    /// `boundary_pairs / n²`.
    pub boundary_fraction: f64,
    /// Inner pairs whose sorted points are not connected.
    pub inner_violations: usize,
    /// Outer pairs whose sorted points are connected.
    pub outer_violations: usize,
}

impl GoodSetReport {
    pub fn violations(&self) -> usize {
        self.inner_violations + self.outer_violations
    }
}

/// Classifies all `n²` cell pairs into the inner good set, the outer good
/// set and the boundary band, and counts pairs where the sorted sample
/// disagrees with the cell-level prediction.
pub fn goodset_classification(grid: &SortedGrid, r: &Radius, eps: f64) -> Result<GoodSetReport> {
    let d = grid.dim();
    r.check_dim(d)?;
    for k in 0..d {
        let rk = r.along(k);
        if !(eps > 0.0 && eps < rk && eps < 2.0 - rk) {
            return invalid(format!("eps = {eps} must satisfy 0 < eps < r and eps < 2 - r (r = {rk})"));
        }
    }
    let m = grid.side();
    let n = grid.len();
    // per-axis sup and inf of |x - y| over L_i × L_j
    let mut sup_gap = vec![0.0; m * m];
    let mut inf_gap = vec![0.0; m * m];
    for i in 1..=m {
        for j in 1..=m {
            let (li, hi) = interval_bounds(i, m);
            let (lj, hj) = interval_bounds(j, m);
            sup_gap[(i - 1) * m + j - 1] = (hj - li).max(hi - lj);
            inf_gap[(i - 1) * m + j - 1] = (lj - hi).max(li - hj).max(0.0);
        }
    }
    let indices: Vec<Vec<usize>> = (0..n).map(|f| grid.multi_index(f)).collect();
    let (inner, outer, inner_bad, outer_bad) = (0..n)
        .into_par_iter()
        .map(|a| {
            let ia = &indices[a];
            let pa = grid.sorted_point(a);
            let mut acc = (0usize, 0usize, 0usize, 0usize);
            for (b, ib) in indices.iter().enumerate() {
                let mut widest = f64::NEG_INFINITY;
                let mut closest = f64::NEG_INFINITY;
                for k in 0..d {
                    let cell = (ia[k] - 1) * m + ib[k] - 1;
                    widest = widest.max(sup_gap[cell] - r.along(k));
                    closest = closest.max(inf_gap[cell] - r.along(k));
                }
                if widest < -eps {
                    acc.0 += 1;
                    if !connected(pa, grid.sorted_point(b), r) {
                        acc.2 += 1;
                    }
                } else if closest > eps {
                    acc.1 += 1;
                    if connected(pa, grid.sorted_point(b), r) {
                        acc.3 += 1;
                    }
                }
            }
            acc
        })
        .reduce(
            || (0, 0, 0, 0),
            |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2, x.3 + y.3),
        );
    let boundary = n * n - inner - outer;
    Ok(GoodSetReport {
        eps,
        inner_pairs: inner,
        outer_pairs: outer,
        boundary_pairs: boundary,
        boundary_fraction: boundary as f64 / (n as f64 * n as f64),
        inner_violations: inner_bad,
        outer_violations: outer_bad,
    })
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub seed: u64,
    pub d: usize,
    pub r: Radius,
    pub n: usize,
    pub sup_h: f64,
    pub l1_dist: f64,
    pub boundary_fraction: f64,
    pub violations: usize,
}

/// All convergence measurements for one sorted sample.
pub fn convergence_row(grid: &SortedGrid, r: &Radius, eps: f64, sub: usize) -> Result<ConvergenceRow> {
    let good = goodset_classification(grid, r, eps)?;
    Ok(ConvergenceRow {
        seed: grid.cloud().seed(),
        d: grid.dim(),
        r: r.clone(),
        n: grid.len(),
        sup_h: sup_h_distance(grid, r)?,
        l1_dist: l1_kernel_distance(grid, r, sub)?,
        boundary_fraction: good.boundary_fraction,
        violations: good.violations(),
    })
}

fn radius_field(r: &Radius) -> String {
    match r {
        Radius::Isotropic(v) => fmt17(*v),
        Radius::Anisotropic(v) => v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(";"),
    }
}

/// CSV with columns `seed,d,r,n,sup_H,l1_dist,boundary_fraction,violations`.
pub fn write_convergence_csv<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<()> {
    write_csv_rows(
        out,
        Some("seed,d,r,n,sup_H,l1_dist,boundary_fraction,violations"),
        rows.iter().map(|row| {
            vec![
                row.seed.to_string(),
                row.d.to_string(),
                radius_field(&row.r),
                row.n.to_string(),
                fmt17(row.sup_h),
                fmt17(row.l1_dist),
                fmt17(row.boundary_fraction),
                row.violations.to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{symmetric_eigenvalues, DEFAULT_TOL};
    use crate::geometry::sample_uniform_cube;
    use crate::kernel::{kernel_value, KernelSpec};

    fn cloud(points: &[&[f64]]) -> PointCloud {
        let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        PointCloud::from_points(&pts, 0).unwrap()
    }

    #[test]
    fn roots_and_powers() {
        assert_eq!(integer_root(2025, 2), Some(45));
        assert_eq!(integer_root(1728, 3), Some(12));
        assert_eq!(integer_root(2000, 2), None);
        assert_eq!(integer_root(7, 1), Some(7));
        assert_eq!(checked_power(10, 30), None);
    }

    #[test]
    fn one_dimensional_sort_is_order_statistics() {
        let c = sample_uniform_cube(50, 1, 4).unwrap();
        let g = coordinate_sort(&c, 50).unwrap();
        let xs: Vec<f64> = (0..50).map(|i| g.sorted_point(i)[0]).collect();
        assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        let mut expect: Vec<f64> = c.points().map(|p| p[0]).collect();
        expect.sort_by(f64::total_cmp);
        assert_eq!(xs, expect);
    }

    #[test]
    fn two_by_two_hand_example() {
        let c = cloud(&[&[-0.5, -0.5], &[-0.4, 0.5], &[0.5, -0.5], &[0.4, 0.5]]);
        let g = coordinate_sort(&c, 2).unwrap();
        assert_eq!(g.point_at(&[1, 1]).unwrap(), &[-0.5, -0.5]);
        assert_eq!(g.point_at(&[1, 2]).unwrap(), &[-0.4, 0.5]);
        assert_eq!(g.point_at(&[2, 1]).unwrap(), &[0.5, -0.5]);
        assert_eq!(g.point_at(&[2, 2]).unwrap(), &[0.4, 0.5]);
    }

    #[test]
    fn ties_keep_original_order() {
        let c = cloud(&[&[0.1], &[0.1], &[-0.3], &[0.1]]);
        let g = coordinate_sort(&c, 4).unwrap();
        assert_eq!(g.order(), &[2, 0, 1, 3]);
    }

    #[test]
    fn rejects_non_powers() {
        let c = sample_uniform_cube(10, 2, 0).unwrap();
        assert!(coordinate_sort(&c, 3).is_err());
        assert!(coordinate_sort(&c, 0).is_err());
    }

    #[test]
    fn block_monotonicity_and_bijection() {
        for (m, d) in [(5, 2), (4, 3), (3, 4)] {
            let n = checked_power(m, d).unwrap();
            let c = sample_uniform_cube(n, d, 99).unwrap();
            let g = coordinate_sort(&c, m).unwrap();
            let mut seen = g.order().to_vec();
            seen.sort();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
            // within a block of fixed (i_1..i_{k-1}), coordinate k is
            // non-decreasing across sub-blocks i_k
            for k in 0..d {
                let block = checked_power(m, d - k).unwrap();
                let sub = block / m;
                for start in (0..n).step_by(block) {
                    for s in 0..m - 1 {
                        let max_here = (start + s * sub..start + (s + 1) * sub)
                            .map(|f| g.sorted_point(f)[k])
                            .fold(f64::MIN, f64::max);
                        let min_next = (start + (s + 1) * sub..start + (s + 2) * sub)
                            .map(|f| g.sorted_point(f)[k])
                            .fold(f64::MAX, f64::min);
                        assert!(max_here <= min_next);
                    }
                }
            }
            for flat in [0, n / 2, n - 1] {
                assert_eq!(g.flat_index(&g.multi_index(flat)).unwrap(), flat);
            }
        }
    }

    #[test]
    fn cell_examples() {
        assert_eq!(cell_of(&[-1.0], 4).unwrap(), vec![1]);
        assert_eq!(cell_of(&[1.0], 4).unwrap(), vec![4]);
        assert_eq!(cell_of(&[0.0, 0.0], 2).unwrap(), vec![2, 2]);
        assert_eq!(cell_of(&[-0.5], 4).unwrap(), vec![2]);
        assert!(cell_of(&[1.1], 4).is_err());
        for i in 1..=7 {
            let (lo, hi) = interval_bounds(i, 7);
            assert_eq!(interval_of(0.5 * (lo + hi), 7).unwrap(), i);
        }
    }

    #[test]
    fn step_matrix_small_cases() {
        let c = cloud(&[&[0.3], &[-0.2]]);
        let g = coordinate_sort(&c, 2).unwrap();
        let k = step_w_matrix(&g, &Radius::new(1.0).unwrap()).unwrap();
        assert!(k.matrix.as_slice().iter().all(|&v| (v - 0.5).abs() < 1e-15));

        let c = sample_uniform_cube(16, 2, 8).unwrap();
        let g = coordinate_sort(&c, 4).unwrap();
        let k = step_w_matrix(&g, &Radius::new(2.0 - 1e-12).unwrap()).unwrap();
        assert!(k.matrix.as_slice().iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn step_matrix_is_isospectral_with_w() {
        let r = Radius::new(0.9).unwrap();
        let c = sample_uniform_cube(125, 3, 21).unwrap();
        let g = coordinate_sort(&c, 5).unwrap();
        let step = step_w_matrix(&g, &r).unwrap();
        let w = w_matrix(&c, &r).unwrap();
        assert_eq!(w.permuted(g.order()).unwrap(), step.matrix);
        let a = symmetric_eigenvalues(&w, DEFAULT_TOL).unwrap();
        let b = symmetric_eigenvalues(&step.matrix, DEFAULT_TOL).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-10);
    }

    #[test]
    fn profile_range_handles_cells_around_zero() {
        // odd m puts 0 inside the middle cell
        let (lo, hi) = profile_range(-1.0 / 3.0, 1.0 / 3.0, 1.0);
        assert_eq!(hi, 1.0);
        assert!((lo - (1.0 - 1.0 / 6.0)).abs() < 1e-15);
    }

    /// Brute-force sup by dense sampling inside each cell.
    fn sampled_sup_h(grid: &SortedGrid, r: &Radius, per_axis: usize) -> f64 {
        let n = grid.len();
        let m = grid.side();
        let deg = sorted_degrees(grid, r);
        let mut worst: f64 = 0.0;
        for flat in 0..n {
            let idx = grid.multi_index(flat);
            let c = deg[flat] as f64 / n as f64;
            let d = idx.len();
            for q in 0..per_axis.pow(d as u32) {
                let mut rest = q;
                let mut h = 1.0;
                for (k, &i) in idx.iter().enumerate() {
                    let (lo, hi) = interval_bounds(i, m);
                    let t = (rest % per_axis) as f64 / (per_axis - 1) as f64;
                    rest /= per_axis;
                    h *= crate::kernel::degree_profile(lo + t * (hi - lo), r.along(k)).unwrap();
                }
                worst = worst.max((c - h).abs());
            }
        }
        worst
    }

    #[test]
    fn sup_h_matches_dense_sampling() {
        for (m, d, r) in [(25, 1, 1.0), (7, 2, 0.6), (4, 3, 1.3)] {
            let n = checked_power(m, d).unwrap();
            let g = coordinate_sort(&sample_uniform_cube(n, d, 3).unwrap(), m).unwrap();
            let r = Radius::new(r).unwrap();
            let exact = sup_h_distance(&g, &r).unwrap();
            let sampled = sampled_sup_h(&g, &r, 11);
            assert!(exact >= sampled - 1e-12);
            // odd per-axis sample count hits x = 0 in straddling cells
            assert!(exact - sampled < 1e-12, "{exact} vs {sampled}");
        }
    }

    #[test]
    fn sup_h_degenerate_grid() {
        let c = cloud(&[&[0.2]]);
        let g = coordinate_sort(&c, 1).unwrap();
        let v = sup_h_distance(&g, &Radius::new(1.0).unwrap()).unwrap();
        // H_1 ranges over [1/2, 1] and H_{1,r} = 1
        assert!((v - 0.5).abs() < 1e-15);
        assert!(v <= 1.0);
    }

    #[test]
    fn sup_h_small_for_large_samples() {
        let g = coordinate_sort(&sample_uniform_cube(4000, 1, 1).unwrap(), 4000).unwrap();
        let v = sup_h_distance(&g, &Radius::new(1.0).unwrap()).unwrap();
        assert!(v <= 0.1, "{v}");
    }

    /// Direct evaluation of the step kernel through cell lookup, against the
    /// limiting kernel, on a fine midpoint grid.
    fn brute_l1(grid: &SortedGrid, r: f64, per_axis: usize) -> f64 {
        let n = grid.len();
        let m = grid.side();
        let rad = Radius::new(r).unwrap();
        let step = step_w_matrix(grid, &rad).unwrap();
        let spec = KernelSpec::normalized(1, rad).unwrap();
        let xs = crate::quadrature::midpoints(-1.0, 1.0, per_axis);
        let mut acc = 0.0;
        for &x in &xs {
            for &y in &xs {
                let i = interval_of(x, m).unwrap() - 1;
                let j = interval_of(y, m).unwrap() - 1;
                let kn = n as f64 * step.matrix.get(i, j);
                acc += (kn - kernel_value(&spec, &[x], &[y]).unwrap()).abs();
            }
        }
        acc / (per_axis * per_axis) as f64
    }

    #[test]
    fn l1_matches_direct_lookup() {
        let g = coordinate_sort(&sample_uniform_cube(40, 1, 6).unwrap(), 40).unwrap();
        let fast = l1_kernel_distance(&g, &Radius::new(0.81).unwrap(), 3).unwrap();
        let slow = brute_l1(&g, 0.81, 120);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn l1_examples() {
        let g = coordinate_sort(&sample_uniform_cube(2000, 1, 2).unwrap(), 2000).unwrap();
        let v = l1_kernel_distance(&g, &Radius::new(1.0).unwrap(), 2).unwrap();
        assert!(v > 0.0 && v <= 0.2, "{v}");

        // near-complete regime: both kernels are ≈ 1 almost everywhere
        let c = cloud(&[&[-0.9], &[-0.3], &[0.3], &[0.9]]);
        let g = coordinate_sort(&c, 4).unwrap();
        let v = l1_kernel_distance(&g, &Radius::new(1.99).unwrap(), 8).unwrap();
        assert!(v <= 0.05, "{v}");
        assert!(l1_kernel_distance(&g, &Radius::new(1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn goodset_examples() {
        let r = Radius::new(1.0).unwrap();
        let g = coordinate_sort(&sample_uniform_cube(2000, 1, 12).unwrap(), 2000).unwrap();
        let rep = goodset_classification(&g, &r, 0.1).unwrap();
        assert_eq!(rep.violations(), 0);
        assert!(rep.boundary_fraction <= 2.0 * 1.0 * (2.0 - 1.0) * 0.1 + 0.01);
        assert_eq!(rep.inner_pairs + rep.outer_pairs + rep.boundary_pairs, 2000 * 2000);
        assert!(goodset_classification(&g, &r, 1.0).is_err());
        assert!(goodset_classification(&g, &r, 0.0).is_err());
        let r19 = Radius::new(1.9).unwrap();
        assert!(goodset_classification(&g, &r19, 0.15).is_err());
    }

    #[test]
    fn goodset_cells_agree_with_pointwise_distances() {
        // every pair of points drawn from an inner pair of cells is connected
        let g = coordinate_sort(&sample_uniform_cube(36, 2, 5).unwrap(), 6).unwrap();
        let r = Radius::new(0.9).unwrap();
        let rep = goodset_classification(&g, &r, 0.05).unwrap();
        assert!(rep.inner_pairs > 0 && rep.outer_pairs > 0);
        let total = rep.inner_pairs + rep.outer_pairs + rep.boundary_pairs;
        assert_eq!(total, 36 * 36);
    }

    #[test]
    fn convergence_csv_layout() {
        let g = coordinate_sort(&sample_uniform_cube(64, 1, 9).unwrap(), 64).unwrap();
        let row = convergence_row(&g, &Radius::new(1.0).unwrap(), 0.1, 2).unwrap();
        assert_eq!(row.seed, 9);
        let mut buf = Vec::new();
        write_convergence_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "seed,d,r,n,sup_H,l1_dist,boundary_fraction,violations"
        );
        assert_eq!(lines.next().unwrap().split(',').count(), 8);
    }
}
