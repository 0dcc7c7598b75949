//! Uniform samples in the cube `B^d = [-1,1]^d` and the L∞ connection rule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Seeded generator used for every random draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `trial` in a sweep started from `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

/// `n` points of `B^d`, stored row-major, together with the seed that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    seed: u64,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from explicit points. Every point must have the same
    /// dimension and every coordinate must lie in `[-1,1]`.
    pub fn from_points(points: &[Vec<f64>], seed: u64) -> Result<Self> {
        let Some(first) = points.first() else {
            return invalid("point cloud must contain at least one point");
        };
        let dim = first.len();
        if dim == 0 {
            return invalid("points must have dimension >= 1");
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return invalid(format!("point {i} has dimension {} (expected {dim})", p.len()));
            }
            if let Some(c) = p.iter().find(|c| !(-1.0..=1.0).contains(*c)) {
                return invalid(format!("coordinate {c} of point {i} lies outside [-1,1]"));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, seed, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// The sub-cloud formed by the listed points, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return invalid("selection must be nonempty");
        }
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return invalid(format!("index {i} out of range for {} points", self.len()));
            }
            coords.extend_from_slice(self.point(i));
        }
        Ok(Self {
            dim: self.dim,
            seed: self.seed,
            coords,
        })
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return invalid(format!("prefix length {n} not in 1..={}", self.len()));
        }
        Ok(Self {
            dim: self.dim,
            seed: self.seed,
            coords: self.coords[..n * self.dim].to_vec(),
        })
    }
}

/// Draws `n` i.i.d. uniform points of `[-1,1]^d`. The same `(n, d, seed)`
/// always yields the same cloud.
pub fn sample_uniform_cube(n: usize, d: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return invalid("n must be >= 1");
    }
    if d == 0 {
        return invalid("d must be >= 1");
    }
    let mut rng = rng_from_seed(seed);
    let coords = (0..n * d)
        .map(|_| 2.0 * rng.random::<f64>() - 1.0)
        .collect();
    Ok(PointCloud {
        dim: d,
        seed,
        coords,
    })
}

/// Connection radius. Isotropic radii connect points at L∞ distance at most
/// `r`; anisotropic radii use an axis-aligned box with half-widths `r_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Isotropic(f64),
    Anisotropic(Vec<f64>),
}

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(Self::Isotropic(r))
    }

    pub fn anisotropic(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return invalid("anisotropic radius needs at least one component");
        }
        for &r in &radii {
            check_radius(r)?;
        }
        Ok(Self::Anisotropic(radii))
    }

    /// Radius along axis `k`.
    pub fn along(&self, k: usize) -> f64 {
        match self {
            Self::Isotropic(r) => *r,
            Self::Anisotropic(rs) => rs[k],
        }
    }

    /// Fails unless the radius can be used in dimension `d`.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            Self::Anisotropic(rs) if rs.len() != d => invalid(format!(
                "anisotropic radius has {} components but the dimension is {d}",
                rs.len()
            )),
            _ => Ok(()),
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self, Self::Isotropic(_))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 2.0 {
        Ok(())
    } else {
        invalid(format!("radius {r} must lie in the open interval (0, 2)"))
    }
}

/// `max_i |x_i - y_i|`.
pub fn linf_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return invalid(format!("dimension mismatch: {} vs {}", x.len(), y.len()));
    }
    Ok(linf(x, y))
}

#[inline]
pub(crate) fn linf(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Connection indicator `h_r(x, y)`: 1 when `|x_i - y_i| <= r_i` on every
/// axis, 0 otherwise. Distance exactly `r` connects.
pub fn indicator_h(x: &[f64], y: &[f64], r: &Radius) -> Result<u8> {
    if x.len() != y.len() {
        return invalid(format!("dimension mismatch: {} vs {}", x.len(), y.len()));
    }
    r.check_dim(x.len())?;
    Ok(connected(x, y, r) as u8)
}

#[inline]
pub(crate) fn connected(x: &[f64], y: &[f64], r: &Radius) -> bool {
    match r {
        Radius::Isotropic(r) => x.iter().zip(y).all(|(a, b)| (a - b).abs() <= *r),
        Radius::Anisotropic(rs) => x
            .iter()
            .zip(y)
            .zip(rs)
            .all(|((a, b), r)| (a - b).abs() <= *r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_in_range() {
        let c = sample_uniform_cube(1, 3, 7).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.dim(), 3);
        assert!(c.point(0).iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn coordinate_mean_near_zero() {
        let c = sample_uniform_cube(1000, 1, 1).unwrap();
        let mean = c.points().map(|p| p[0]).sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_uniform_cube(5, 2, 42).unwrap();
        let b = sample_uniform_cube(5, 2, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_uniform_cube(5, 2, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(sample_uniform_cube(0, 2, 1).is_err());
        assert!(sample_uniform_cube(3, 0, 1).is_err());
        assert!(PointCloud::from_points(&[], 0).is_err());
        assert!(PointCloud::from_points(&[vec![1.5]], 0).is_err());
        assert!(PointCloud::from_points(&[vec![0.0], vec![0.0, 0.1]], 0).is_err());
    }

    #[test]
    fn linf_examples() {
        assert_eq!(linf_distance(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(linf_distance(&[0.3, -0.2], &[0.3, -0.2]).unwrap(), 0.0);
        assert_eq!(
            linf_distance(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0]).unwrap(),
            2.0
        );
        assert!(linf_distance(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn indicator_examples() {
        let r1 = Radius::new(1.0).unwrap();
        assert_eq!(indicator_h(&[0.0, 0.0], &[0.9, 0.9], &r1).unwrap(), 1);
        assert_eq!(indicator_h(&[0.0, 0.0], &[1.01, 0.0], &r1).unwrap(), 0);
        let boxed = Radius::anisotropic(vec![0.5, 1.2]).unwrap();
        assert_eq!(indicator_h(&[0.0, 0.0], &[0.4, 1.1], &boxed).unwrap(), 1);
        assert_eq!(indicator_h(&[0.0, 0.0], &[0.6, 1.1], &boxed).unwrap(), 0);
        assert!(indicator_h(&[0.0], &[0.0], &boxed).is_err());
    }

    #[test]
    fn boundary_distance_connects() {
        let r = Radius::new(0.5).unwrap();
        assert_eq!(indicator_h(&[0.0], &[0.5], &r).unwrap(), 1);
        assert_eq!(indicator_h(&[-0.25], &[0.25], &r).unwrap(), 1);
    }

    #[test]
    fn radius_range() {
        assert!(Radius::new(0.0).is_err());
        assert!(Radius::new(2.0).is_err());
        assert!(Radius::new(-0.3).is_err());
        assert!(Radius::new(f64::NAN).is_err());
        assert!(Radius::new(1.999).is_ok());
        assert!(Radius::anisotropic(vec![0.5, 2.0]).is_err());
        assert!(Radius::anisotropic(vec![]).is_err());
    }

    fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..=1.0, d)
    }

    proptest! {
        #[test]
        fn linf_is_a_metric(x in point(3), y in point(3), z in point(3)) {
            let dxy = linf_distance(&x, &y).unwrap();
            prop_assert_eq!(dxy, linf_distance(&y, &x).unwrap());
            prop_assert_eq!(linf_distance(&x, &x).unwrap(), 0.0);
            prop_assert!(dxy > 0.0 || x == y);
            let dxz = linf_distance(&x, &z).unwrap();
            let dzy = linf_distance(&z, &y).unwrap();
            prop_assert!(dxy <= dxz + dzy + 1e-15);
        }

        #[test]
        fn indicator_is_symmetric(x in point(2), y in point(2), r in 0.01f64..1.99) {
            let r = Radius::new(r).unwrap();
            prop_assert_eq!(indicator_h(&x, &y, &r).unwrap(), indicator_h(&y, &x, &r).unwrap());
        }
    }
}
