//! Limiting integral operators of the normalized adjacency.
//!
//! On `L²([-1,1]^d, ν_d)`, with `ν_d` the uniform probability measure, the
//! normalized kernel is
//!
//! ```text
//! K_r^d(x, y) = h_r(x, y) / sqrt(H_r(x) H_r(y))
//! ```
//!
//! where `H_r(x) = ν_d(ball of radius r around x)` is the degree profile. The
//! kernel factorizes over coordinates, so its spectrum is the set of
//! `d`-fold products of the one-dimensional spectrum. The 1-D operator is
//! discretized with a midpoint Nyström rule.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::eigen::{symmetric_eigenvalues, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::geometry::Radius;
use crate::graph::SymmetricMatrix;
use crate::quadrature::{adaptive_simpson, midpoints};

/// Squared Hilbert–Schmidt norm of `K_1^1` to the precision usually quoted.
pub const HS_NORM_SQ_K1_QUOTED: f64 = 1.33299;

/// `Σ_{i≥3} λ_i²` for `K_1^1` to the precision usually quoted.
pub const TAIL_SUM_SQ_K1_QUOTED: f64 = 0.0829;

/// Default cutoff for 1-D eigenvalues fed into tensor products.
pub const TENSOR_TRUNCATION: f64 = 1e-4;

/// Degree profile `H_r(x)` for `x ∈ [-1,1]`, `r ∈ (0,2)`.
///
/// Piecewise linear: `(1 + r - |x|) / 2` near the boundary, constant
/// (`r` when `r ≤ 1`, `1` when `r ≥ 1`) in the middle.
pub fn degree_profile(x: f64, r: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return invalid(format!("x = {x} outside [-1,1]"));
    }
    if !(r > 0.0 && r < 2.0) {
        return invalid(format!("radius {r} must lie in (0, 2)"));
    }
    Ok(profile(x, r))
}

#[inline]
pub(crate) fn profile(x: f64, r: f64) -> f64 {
    let ax = x.abs();
    if ax >= (1.0 - r).abs() {
        0.5 * (1.0 + r - ax)
    } else {
        r.min(1.0)
    }
}

/// `H_r(x) = Π_i H_{r_i}(x_i)` on `[-1,1]^d`.
pub fn degree_profile_multidim(x: &[f64], r: &Radius) -> Result<f64> {
    r.check_dim(x.len())?;
    x.iter()
        .enumerate()
        .try_fold(1.0, |acc, (k, &xk)| Ok(acc * degree_profile(xk, r.along(k))?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    /// `h / sqrt(H(x) H(y))`, symmetric.
    Normalized,
    /// `h / H(x)`, one-dimensional and not symmetric.
    Auxiliary,
}

/// Which limiting kernel to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    dim: usize,
    radius: Radius,
    variant: KernelVariant,
}

impl KernelSpec {
    pub fn normalized(dim: usize, radius: Radius) -> Result<Self> {
        if dim == 0 {
            return invalid("kernel dimension must be >= 1");
        }
        radius.check_dim(dim)?;
        Ok(Self {
            dim,
            radius,
            variant: KernelVariant::Normalized,
        })
    }

    pub fn auxiliary(r: f64) -> Result<Self> {
        Ok(Self {
            dim: 1,
            radius: Radius::new(r)?,
            variant: KernelVariant::Auxiliary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> &Radius {
        &self.radius
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut value = 1.0;
        for k in 0..self.dim {
            let r = self.radius.along(k);
            if (x[k] - y[k]).abs() > r {
                return 0.0;
            }
            value *= match self.variant {
                KernelVariant::Normalized => 1.0 / (profile(x[k], r) * profile(y[k], r)).sqrt(),
                KernelVariant::Auxiliary => 1.0 / profile(x[k], r),
            };
        }
        value
    }
}

/// `K(x, y)` for the given kernel.
pub fn kernel_value(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != spec.dim || y.len() != spec.dim {
        return invalid(format!(
            "points of dimension {} and {} for a {}-dimensional kernel",
            x.len(),
            y.len(),
            spec.dim
        ));
    }
    if let Some(c) = x.iter().chain(y).find(|c| !(-1.0..=1.0).contains(*c)) {
        return invalid(format!("coordinate {c} outside [-1,1]"));
    }
    Ok(spec.eval_unchecked(x, y))
}

/// Midpoint rule with `m` nodes for the uniform probability measure on
/// `[-1,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NystromGrid {
    nodes: Vec<f64>,
}

impl NystromGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("Nyström grid needs at least one node");
        }
        Ok(Self {
            nodes: midpoints(-1.0, 1.0, m),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weight of each node, `1/m`.
    pub fn weight(&self) -> f64 {
        1.0 / self.nodes.len() as f64
    }
}

fn one_dim_radius(spec: &KernelSpec) -> Result<f64> {
    if spec.dim != 1 {
        return Err(Error::Unsupported(format!(
            "Nyström discretization is one-dimensional; got d = {}",
            spec.dim
        )));
    }
    Ok(spec.radius.along(0))
}

/// `(1/m) K(x_i, x_j)` at the grid nodes, for the normalized 1-D kernel.
pub fn nystrom_matrix(spec: &KernelSpec, grid: &NystromGrid) -> Result<SymmetricMatrix> {
    if spec.variant != KernelVariant::Normalized {
        return Err(Error::Unsupported(
            "the auxiliary kernel is not symmetric; use auxiliary_spectrum".into(),
        ));
    }
    let r = one_dim_radius(spec)?;
    let w = grid.weight();
    let nodes = grid.nodes();
    let scale: Vec<f64> = nodes.iter().map(|&x| 1.0 / profile(x, r).sqrt()).collect();
    Ok(SymmetricMatrix::par_from_fn(grid.len(), |i, j| {
        if (nodes[i] - nodes[j]).abs() <= r {
            w * scale[i] * scale[j]
        } else {
            0.0
        }
    }))
}

/// Spectrum of the `m`-node Nyström matrix of `K_r^1`.
pub fn nystrom_spectrum(r: f64, m: usize, tol: f64) -> Result<Spectrum> {
    let spec = KernelSpec::normalized(1, Radius::new(r)?)?;
    symmetric_eigenvalues(&nystrom_matrix(&spec, &NystromGrid::new(m)?)?, tol)
}

/// Row-major collocation matrix `(1/m) h(x_i, x_j) / H(x_i)` of the
/// auxiliary kernel. Not symmetric.
pub fn auxiliary_collocation(r: f64, grid: &NystromGrid) -> Result<Vec<f64>> {
    let spec = KernelSpec::auxiliary(r)?;
    let w = grid.weight();
    let nodes = grid.nodes();
    Ok(nodes
        .iter()
        .flat_map(|&x| nodes.iter().map(move |&y| (x, y)))
        .map(|(x, y)| w * spec.eval_unchecked(&[x], &[y]))
        .collect())
}

/// Eigenvalues of the auxiliary collocation matrix `C`, computed through the
/// similarity `S = D^{1/2} C D^{-1/2}` with `D = diag(H_r(x_i))`. `S` is
/// symmetric, so the symmetric solver applies.
pub fn auxiliary_spectrum(r: f64, grid: &NystromGrid, tol: f64) -> Result<Spectrum> {
    let c = auxiliary_collocation(r, grid)?;
    symmetric_eigenvalues(&symmetrize_by_profile(&c, r, grid), tol)
}

/// `D^{1/2} C D^{-1/2}`, read off the lower triangle.
pub fn symmetrize_by_profile(c: &[f64], r: f64, grid: &NystromGrid) -> SymmetricMatrix {
    let m = grid.len();
    let root: Vec<f64> = grid.nodes().iter().map(|&x| profile(x, r).sqrt()).collect();
    SymmetricMatrix::from_fn(m, |i, j| root[i] * c[i * m + j] / root[j])
}

/// Spectra of the Nyström matrix restricted to even and odd grid
/// functions. The kernel is invariant under `x ↦ -x`, so for even `m` the
/// union of the two is the full Nyström spectrum.
pub fn nystrom_parity_spectra(r: f64, m: usize, tol: f64) -> Result<(Spectrum, Spectrum)> {
    if m % 2 != 0 {
        return invalid(format!("parity split needs an even node count, got {m}"));
    }
    let spec = KernelSpec::normalized(1, Radius::new(r)?)?;
    let full = nystrom_matrix(&spec, &NystromGrid::new(m)?)?;
    let h = m / 2;
    let even = SymmetricMatrix::from_fn(h, |i, j| full.get(i, j) + full.get(i, m - 1 - j));
    let odd = SymmetricMatrix::from_fn(h, |i, j| full.get(i, j) - full.get(i, m - 1 - j));
    Ok((
        symmetric_eigenvalues(&even, tol)?,
        symmetric_eigenvalues(&odd, tol)?,
    ))
}

/// Largest change of the top `k` Nyström eigenvalues between the last two
/// grids of `ms`.
pub fn refinement_drift(r: f64, ms: &[usize], k: usize, tol: f64) -> Result<f64> {
    if ms.len() < 2 {
        return invalid("refinement needs at least two grid sizes");
    }
    let a = nystrom_spectrum(r, ms[ms.len() - 2], tol)?;
    let b = nystrom_spectrum(r, ms[ms.len() - 1], tol)?;
    a.top(k).max_abs_diff(&b.top(k))
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    magnitude: f64,
    index: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.magnitude
            .total_cmp(&other.magnitude)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// The `top_k` largest values among `d`-fold products of the 1-D
/// eigenvalues, sorted descending.
pub fn tensor_spectrum(eigs_1d: &Spectrum, d: usize, top_k: usize) -> Result<Spectrum> {
    if d == 0 {
        return invalid("tensor dimension must be >= 1");
    }
    let factors = vec![eigs_1d; d];
    tensor_spectrum_mixed(&factors, top_k)
}

/// Like [`tensor_spectrum`], with one 1-D spectrum per axis (box kernels
/// with per-axis radii).
///
/// Products are generated in decreasing magnitude with a max-heap over
/// index tuples; generation stops once no remaining product can exceed the
/// current `top_k`-th largest value.
pub fn tensor_spectrum_mixed(factors: &[&Spectrum], top_k: usize) -> Result<Spectrum> {
    if factors.is_empty() || factors.iter().any(|f| f.order() == 0) {
        return invalid("tensor product needs nonempty 1-D spectra");
    }
    let total = factors
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.order()));
    if total.is_some_and(|t| top_k > t) {
        return invalid(format!("top_k = {top_k} exceeds the number of products"));
    }
    let tol = factors.iter().map(|f| f.tol()).fold(0.0, f64::max);
    if top_k == 0 {
        return Ok(Spectrum::new(Vec::new(), tol));
    }

    let by_magnitude: Vec<Vec<f64>> = factors
        .iter()
        .map(|f| {
            let mut v = f.values().to_vec();
            v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
            v
        })
        .collect();
    let dims: Vec<usize> = by_magnitude.iter().map(Vec::len).collect();
    let encode = |idx: &[usize]| idx.iter().zip(&dims).fold(0usize, |acc, (i, n)| acc * n + i);
    let decode = |mut code: usize| {
        let mut idx = vec![0; dims.len()];
        for (slot, n) in idx.iter_mut().zip(&dims).rev() {
            *slot = code % n;
            code /= n;
        }
        idx
    };
    let product = |idx: &[usize]| {
        idx.iter()
            .zip(&by_magnitude)
            .map(|(&i, v)| v[i])
            .product::<f64>()
    };

    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    let start = vec![0; dims.len()];
    heap.push(Candidate {
        magnitude: product(&start).abs(),
        index: encode(&start),
    });
    seen.insert(encode(&start));
    // best values so far, kept sorted descending
    let mut best: Vec<f64> = Vec::with_capacity(top_k + 1);

    while let Some(Candidate { magnitude, index }) = heap.pop() {
        if best.len() == top_k && magnitude < best[top_k - 1] {
            break;
        }
        let idx = decode(index);
        let value = product(&idx);
        let pos = best.partition_point(|&b| b >= value);
        if pos < top_k {
            best.insert(pos, value);
            best.truncate(top_k);
        }
        for axis in 0..idx.len() {
            if idx[axis] + 1 < dims[axis] {
                let mut next = idx.clone();
                next[axis] += 1;
                let code = encode(&next);
                if seen.insert(code) {
                    heap.push(Candidate {
                        magnitude: product(&next).abs(),
                        index: code,
                    });
                }
            }
        }
    }
    Ok(Spectrum::new(best, tol))
}

/// `‖K_1^1‖²_HS = 4 (log 2)² - 2 ∫_0^1 log(1+x)/(2-x) dx`.
pub fn hs_norm_squared_k1() -> f64 {
    let integral = adaptive_simpson(|x| (1.0 + x).ln() / (2.0 - x), 0.0, 1.0, 1e-10);
    4.0 * std::f64::consts::LN_2.powi(2) - 2.0 * integral
}

/// Rayleigh quotient `⟨K f, f⟩ / ⟨f, f⟩` of `K_r^1` at the odd witness
/// `f(x) = x sqrt(H_r(x))`, for `0 < r < 1`.
///
/// With this `f` the numerator reduces to `(1/4) ∬ x y h_r(x,y) dx dy`;
/// the inner integral is taken exactly and the outer one with an
/// `m`-point midpoint rule.
pub fn rayleigh_lower_bound_r_lt_1(r: f64, m: usize) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return invalid(format!("witness quotient needs 0 < r < 1, got {r}"));
    }
    if m == 0 {
        return invalid("quadrature needs at least one node");
    }
    let h = 2.0 / m as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for x in midpoints(-1.0, 1.0, m) {
        let lo = (x - r).max(-1.0);
        let hi = (x + r).min(1.0);
        num += x * 0.5 * (hi * hi - lo * lo);
        den += x * x * profile(x, r);
    }
    // ν_1 = dx/2 on each axis
    let inner = 0.25 * num * h;
    let norm = 0.5 * den * h;
    Ok(inner / norm)
}

/// `max_i |(K f)(x_i) - λ f(x_i)|` with `K` applied by the grid's
/// quadrature.
pub fn eigenfunction_residual(
    spec: &KernelSpec,
    f: impl Fn(f64) -> f64,
    lambda: f64,
    grid: &NystromGrid,
) -> Result<f64> {
    one_dim_radius(spec)?;
    let nodes = grid.nodes();
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let w = grid.weight();
    Ok(nodes
        .iter()
        .zip(&values)
        .map(|(&x, &fx)| {
            let applied: f64 = nodes
                .iter()
                .zip(&values)
                .map(|(&y, &fy)| spec.eval_unchecked(&[x], &[y]) * fy)
                .sum();
            (w * applied - lambda * fx).abs()
        })
        .fold(0.0, f64::max))
}
