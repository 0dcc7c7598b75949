//! Dense graph operators of a random geometric graph: adjacency `A`,
//! degrees, the normalized adjacency `W = D^{-1/2} A D^{-1/2}` and the
//! normalized Laplacian `I - W`.
//!
//! The adjacency carries self-loops: `A_ii = 1`, so every degree counts the
//! vertex itself and is at least 1.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::export::{fmt17, write_csv_rows};
use crate::geometry::{connected, PointCloud, Radius};

/// Dense real symmetric matrix in row-major storage.
///
/// Every constructor writes `(i, j)` and `(j, i)` from a single value, so
/// symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Evaluates `f(i, j)` for `j <= i` and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Parallel variant of [`from_fn`](Self::from_fn) for large matrices.
    pub fn par_from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                // evaluate on the lower triangle only so (i,j) and (j,i) agree bitwise
                *v = if j <= i { f(i, j) } else { f(j, i) };
            }
        });
        Self { n, data }
    }

    /// Checked constructor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return invalid("matrix must have at least one row");
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return invalid(format!("row {i} has length {} (expected {n})", rows[i].len()));
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return invalid(format!("entries ({i},{j}) and ({j},{i}) differ"));
                }
            }
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `‖M‖_F²`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn max_abs_row_sum(&self) -> f64 {
        self.data
            .chunks_exact(self.n.max(1))
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return invalid(format!("vector length {} vs order {}", v.len(), self.n));
        }
        Ok(self
            .data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `PᵀMP` for the permutation sending new index `i` to old index
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        Ok(Self::from_fn(self.n, |i, j| self.get(perm[i], perm[j])))
    }

    /// One line per row, comma separated, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv_rows(
            out,
            None,
            self.data
                .chunks_exact(self.n)
                .map(|r| r.iter().map(|&x| fmt17(x)).collect::<Vec<_>>()),
        )
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return invalid(format!("permutation length {} vs order {n}", perm.len()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return invalid("not a permutation");
        }
        seen[p] = true;
    }
    Ok(())
}

/// Restriction of `m` to the rows and columns in `keep`, in the given order.
pub fn principal_submatrix(m: &SymmetricMatrix, keep: &[usize]) -> Result<SymmetricMatrix> {
    if keep.is_empty() {
        return invalid("index set must be nonempty");
    }
    let mut seen = vec![false; m.order()];
    for &k in keep {
        if k >= m.order() {
            return invalid(format!("index {k} out of range for order {}", m.order()));
        }
        if seen[k] {
            return invalid(format!("index {k} repeated"));
        }
        seen[k] = true;
    }
    Ok(SymmetricMatrix::from_fn(keep.len(), |i, j| {
        m.get(keep[i], keep[j])
    }))
}

/// All graph operators of `G(n, r)` built from one cloud.
#[derive(Debug, Clone)]
pub struct GraphOperators {
    pub adjacency: SymmetricMatrix,
    pub degrees: Vec<usize>,
    pub w_matrix: SymmetricMatrix,
    pub laplacian: SymmetricMatrix,
}

impl GraphOperators {
    /// `(√d_1, …, √d_n)`, the eigenvector of `W` for eigenvalue 1.
    pub fn sqrt_degrees(&self) -> Vec<f64> {
        self.degrees.iter().map(|&d| (d as f64).sqrt()).collect()
    }
}

/// Degrees (self-loop included) of the graph on `cloud`.
pub fn degrees(cloud: &PointCloud, r: &Radius) -> Result<Vec<usize>> {
    r.check_dim(cloud.dim())?;
    Ok((0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let x = cloud.point(i);
            cloud.points().filter(|y| connected(x, y, r)).count()
        })
        .collect())
}

/// `W = D^{-1/2} A D^{-1/2}` alone, without materializing `A` or `I - W`.
pub fn w_matrix(cloud: &PointCloud, r: &Radius) -> Result<SymmetricMatrix> {
    let deg = degrees(cloud, r)?;
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    Ok(SymmetricMatrix::par_from_fn(cloud.len(), |i, j| {
        if connected(cloud.point(i), cloud.point(j), r) {
            inv_sqrt[i] * inv_sqrt[j]
        } else {
            0.0
        }
    }))
}

/// Builds `A`, the degrees, `W` and `𝓛 = I - W`. Cost is `O(n² d)`.
pub fn build_graph_operators(cloud: &PointCloud, r: &Radius) -> Result<GraphOperators> {
    r.check_dim(cloud.dim())?;
    let n = cloud.len();
    let adjacency = SymmetricMatrix::par_from_fn(n, |i, j| {
        connected(cloud.point(i), cloud.point(j), r) as u8 as f64
    });
    let degrees: Vec<usize> = (0..n)
        .map(|i| adjacency.row(i).iter().filter(|&&a| a != 0.0).count())
        .collect();
    let inv_sqrt: Vec<f64> = degrees.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let w_matrix =
        SymmetricMatrix::par_from_fn(n, |i, j| adjacency.get(i, j) * inv_sqrt[i] * inv_sqrt[j]);
    let laplacian = SymmetricMatrix::par_from_fn(n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - w_matrix.get(i, j)
    });
    Ok(GraphOperators {
        adjacency,
        degrees,
        w_matrix,
        laplacian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_uniform_cube;
    use proptest::prelude::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        PointCloud::from_points(&pts, 0).unwrap()
    }

    #[test]
    fn disconnected_pair_is_identity() {
        let c = cloud(&[&[-0.9], &[0.9]]);
        let ops = build_graph_operators(&c, &Radius::new(1.0).unwrap()).unwrap();
        assert_eq!(ops.adjacency, SymmetricMatrix::identity(2));
        assert_eq!(ops.w_matrix, SymmetricMatrix::identity(2));
        assert_eq!(ops.degrees, vec![1, 1]);
        assert!(ops.laplacian.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn three_close_collinear_points() {
        let c = cloud(&[&[0.0, 0.0], &[0.1, 0.1], &[0.2, 0.2]]);
        let ops = build_graph_operators(&c, &Radius::new(0.5).unwrap()).unwrap();
        for &w in ops.w_matrix.as_slice() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(ops.degrees, vec![3, 3, 3]);
    }

    #[test]
    fn near_complete_radius_gives_averaging_matrix() {
        let c = sample_uniform_cube(20, 2, 3).unwrap();
        let ops = build_graph_operators(&c, &Radius::new(2.0 - 1e-12).unwrap()).unwrap();
        assert!(ops.adjacency.as_slice().iter().all(|&a| a == 1.0));
        for &w in ops.w_matrix.as_slice() {
            assert!((w - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn operator_invariants() {
        let c = sample_uniform_cube(150, 2, 11).unwrap();
        let ops = build_graph_operators(&c, &Radius::new(0.8).unwrap()).unwrap();
        let n = c.len();
        for i in 0..n {
            assert_eq!(ops.adjacency.get(i, i), 1.0);
            let row_sum: f64 = ops.adjacency.row(i).iter().sum();
            assert_eq!(row_sum as usize, ops.degrees[i]);
            for j in 0..n {
                let expect = ops.adjacency.get(i, j)
                    / ((ops.degrees[i] * ops.degrees[j]) as f64).sqrt();
                assert!((ops.w_matrix.get(i, j) - expect).abs() < 1e-15);
                let id = if i == j { 1.0 } else { 0.0 };
                assert_eq!(ops.laplacian.get(i, j), id - ops.w_matrix.get(i, j));
            }
        }
        assert_eq!(w_matrix(&c, &Radius::new(0.8).unwrap()).unwrap(), ops.w_matrix);
    }

    #[test]
    fn sqrt_degree_vector_is_fixed_by_w() {
        let c = sample_uniform_cube(300, 1, 5).unwrap();
        let ops = build_graph_operators(&c, &Radius::new(0.6).unwrap()).unwrap();
        let v = ops.sqrt_degrees();
        let wv = ops.w_matrix.mul_vec(&v).unwrap();
        let err = wv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * 300.0, "{err}");
    }

    #[test]
    fn anisotropic_dimension_checked() {
        let c = sample_uniform_cube(4, 3, 1).unwrap();
        let r = Radius::anisotropic(vec![0.5, 1.0]).unwrap();
        assert!(build_graph_operators(&c, &r).is_err());
    }

    #[test]
    fn principal_submatrix_examples() {
        let id = SymmetricMatrix::identity(3);
        assert_eq!(
            principal_submatrix(&id, &[0, 2]).unwrap(),
            SymmetricMatrix::identity(2)
        );
        let m = SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let sub = principal_submatrix(&m, &[1]).unwrap();
        assert_eq!(sub.as_slice(), &[3.0]);
        assert!(principal_submatrix(&m, &[]).is_err());
        assert!(principal_submatrix(&m, &[2]).is_err());
        assert!(principal_submatrix(&m, &[0, 0]).is_err());
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 3.0]]).is_err());
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn csv_export() {
        let m = SymmetricMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, -2.0]]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(parsed, vec![vec![1.0, 0.5], vec![0.5, -2.0]]);
    }

    proptest! {
        #[test]
        fn permuting_points_conjugates_w(seed in 0u64..1000, rot in 1usize..30) {
            let c = sample_uniform_cube(30, 2, seed).unwrap();
            let r = Radius::new(0.7).unwrap();
            let perm: Vec<usize> = (0..30).map(|i| (i + rot) % 30).collect();
            let w = w_matrix(&c, &r).unwrap();
            let wp = w_matrix(&c.select(&perm).unwrap(), &r).unwrap();
            prop_assert_eq!(w.permuted(&perm).unwrap(), wp);
        }
    }
}
