//! Seeded experiments on `W_{n,r}` spectra: eigenvalue counts near the
//! limiting spectrum, spectral gaps across regimes of `r`, and interlacing
//! between nested samples.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::eigen::{symmetric_eigenvalues, Spectrum};
use crate::error::{invalid, Result};
use crate::export::SCHEMA_VERSION;
use crate::geometry::{sample_uniform_cube, trial_seed, PointCloud, Radius};
use crate::graph::{principal_submatrix, w_matrix};
use crate::ordering::{checked_power, integer_root};

/// `n choose k`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Spectrum of `W_{n,r}` for a cloud.
pub fn w_spectrum(cloud: &PointCloud, r: &Radius, tol: f64) -> Result<Spectrum> {
    symmetric_eigenvalues(&w_matrix(cloud, r)?, tol)
}

/// Number of eigenvalues strictly inside `(lo, hi)`.
pub fn measure_count(spec: &Spectrum, lo: f64, hi: f64) -> usize {
    spec.count_in(lo, hi)
}

/// Empirical spectral measure `μ_n`: a point mass at each eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub eigenvalues: Spectrum,
}

impl SpectralMeasure {
    pub fn new(eigenvalues: Spectrum) -> Self {
        Self { eigenvalues }
    }

    /// Mass of the open interval `(lo, hi)`.
    pub fn count(&self, lo: f64, hi: f64) -> usize {
        self.eigenvalues.count_in(lo, hi)
    }

    /// Mass of each bin `[e_i, e_{i+1})`, the last bin closed. Edges must be
    /// strictly increasing.
    pub fn histogram(&self, edges: &[f64]) -> Result<Vec<usize>> {
        if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("histogram edges must be strictly increasing, at least two");
        }
        let bins = edges.len() - 1;
        let mut counts = vec![0; bins];
        for &v in self.eigenvalues.values() {
            if v < edges[0] || v > edges[bins] {
                continue;
            }
            let b = edges.partition_point(|&e| e <= v).saturating_sub(1).min(bins - 1);
            counts[b] += 1;
        }
        Ok(counts)
    }
}

/// Eigenvalue counts in the windows `I_{k,δ} = (2^{-k} - δ, 2^{-k} + δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityProfile {
    pub d: usize,
    pub delta: f64,
    /// `μ_n(I_{k,δ})` for `k = 0..=d`.
    pub counts: Vec<usize>,
    /// Eigenvalues with `|λ| > 0.3 + δ` lying in none of the windows.
    pub outside: usize,
}

impl MultiplicityProfile {
    /// Whether every window holds at least `C(d, k)` eigenvalues.
    pub fn meets_binomial_floor(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(k, &c)| c >= binomial(self.d, k))
    }
}

/// The windows `I_{k,δ}` for `k = 0..=d`; they are pairwise disjoint iff
/// `0 < δ <= 2^{-d-1}`.
pub fn multiplicity_windows(d: usize, delta: f64) -> Result<Vec<(f64, f64)>> {
    if d == 0 {
        return invalid("dimension must be >= 1");
    }
    let limit = 0.5f64.powi(d as i32 + 1);
    if !(delta > 0.0 && delta <= limit) {
        return invalid(format!("delta = {delta} must lie in (0, {limit}] so the windows are disjoint"));
    }
    Ok((0..=d)
        .map(|k| {
            let c = 0.5f64.powi(k as i32);
            (c - delta, c + delta)
        })
        .collect())
}

/// Multiplicity profile of an already computed spectrum.
pub fn multiplicity_profile_of(spec: &Spectrum, d: usize, delta: f64) -> Result<MultiplicityProfile> {
    let windows = multiplicity_windows(d, delta)?;
    let counts = windows.iter().map(|&(lo, hi)| spec.count_in(lo, hi)).collect();
    let outside = spec
        .values()
        .iter()
        .filter(|&&v| v.abs() > 0.3 + delta && !windows.iter().any(|&(lo, hi)| v > lo && v < hi))
        .count();
    Ok(MultiplicityProfile {
        d,
        delta,
        counts,
        outside,
    })
}

/// Multiplicity profile of `W_{n,1}` for a cloud.
pub fn multiplicity_profile(cloud: &PointCloud, delta: f64, tol: f64) -> Result<MultiplicityProfile> {
    multiplicity_windows(cloud.dim(), delta)?;
    let spec = w_spectrum(cloud, &Radius::new(1.0)?, tol)?;
    multiplicity_profile_of(&spec, cloud.dim(), delta)
}

/// Summary statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        Self {
            mean: values.iter().sum::<f64>() / n,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Where the spectral gap should settle for a given radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRegime {
    /// `r < 1`: `γ₂ ∈ (0, 1/2)`.
    Short,
    /// `r = 1`: `γ₂ → 1/2`.
    Critical,
    /// `r > 1`: `γ₂ ∈ (1/2, 1)`.
    Long,
}

impl GapRegime {
    pub fn of(r: f64) -> Self {
        if r < 1.0 {
            GapRegime::Short
        } else if r > 1.0 {
            GapRegime::Long
        } else {
            GapRegime::Critical
        }
    }

    /// Open window that `γ₂` must fall in at finite `n`. The critical window
    /// half-width of 0.05 is a finite-size allowance.
    pub fn window(self) -> (f64, f64) {
        match self {
            GapRegime::Short => (0.0, 0.5),
            GapRegime::Critical => (0.45, 0.55),
            GapRegime::Long => (0.5, 1.0),
        }
    }
}

/// Spectral gaps `γ₂ = 1 - λ₂` across trials for one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub r: f64,
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub gamma2_samples: Vec<f64>,
    pub summary: Summary,
    pub regime: GapRegime,
}

impl GapReport {
    /// Whether every sample lies in the regime window.
    pub fn in_regime(&self) -> bool {
        let (lo, hi) = self.regime.window();
        self.gamma2_samples.iter().all(|&g| g > lo && g < hi)
    }
}

/// `γ₂` for each `r` and trial. Trial `t` samples its cloud with seed
/// `seed + t`, and the same clouds are used for every `r`.
pub fn gap_sweep(d: usize, n: usize, r_values: &[f64], trials: usize, seed: u64, tol: f64) -> Result<Vec<GapReport>> {
    if n < 2 {
        return invalid("gap sweeps need n >= 2");
    }
    if trials == 0 {
        return invalid("trials must be >= 1");
    }
    let radii = r_values.iter().map(|&r| Radius::new(r)).collect::<Result<Vec<_>>>()?;
    let clouds = (0..trials)
        .map(|t| sample_uniform_cube(n, d, trial_seed(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..radii.len())
        .flat_map(|i| (0..trials).map(move |t| (i, t)))
        .collect();
    let gammas = jobs
        .par_iter()
        .map(|&(i, t)| {
            let spec = w_spectrum(&clouds[t], &radii[i], tol)?;
            Ok(1.0 - spec.values()[1])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(r_values
        .iter()
        .zip(gammas.chunks(trials))
        .map(|(&r, g)| GapReport {
            r,
            d,
            n,
            trials,
            seed,
            gamma2_samples: g.to_vec(),
            summary: Summary::of(g),
            regime: GapRegime::of(r),
        })
        .collect())
}

/// Outcome of a Cauchy interlacing check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterlacingReport {
    pub holds: bool,
    /// Largest amount by which `α_{k+n-m} <= β_k <= α_k` is broken (0 if
    /// never).
    pub worst_violation: f64,
}

/// Checks `α_{k+n-m} - tol <= β_k <= α_k + tol` for a parent spectrum `α`
/// of order `n` and a child spectrum `β` of order `m <= n`, both sorted
/// in decreasing order.
pub fn interlacing_check(parent: &Spectrum, child: &Spectrum, tol: f64) -> Result<InterlacingReport> {
    let n = parent.order();
    let m = child.order();
    if m > n {
        return invalid(format!("child of order {m} exceeds parent of order {n}"));
    }
    let a = parent.values();
    let worst = child
        .values()
        .iter()
        .enumerate()
        .map(|(k, &b)| (b - a[k]).max(a[k + n - m] - b).max(0.0))
        .fold(0.0, f64::max);
    Ok(InterlacingReport {
        holds: worst <= tol,
        worst_violation: worst,
    })
}

/// Counts of `|λ| > λ*` at the three nested sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub lambda: f64,
    pub lower: usize,
    pub middle: usize,
    pub upper: usize,
    pub holds: bool,
}

impl SandwichRow {
    fn new(lambda: f64, specs: [&Spectrum; 3]) -> Self {
        let count = |s: &Spectrum| s.values().iter().filter(|v| v.abs() > lambda).count();
        let (lower, middle, upper) = (count(specs[0]), count(specs[1]), count(specs[2]));
        Self {
            lambda,
            lower,
            middle,
            upper,
            holds: lower <= middle && middle <= upper,
        }
    }
}

/// Threshold-count sandwich between the perfect powers around `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub d: usize,
    pub n: usize,
    /// `(m-1)^d` and `m^d`; equal to `n` when `n` is itself a power.
    pub lower_size: usize,
    pub upper_size: usize,
    pub seed: u64,
    pub degenerate: bool,
    /// Counts for principal submatrices of the largest `W`; Cauchy
    /// interlacing guarantees these.
    pub principal: Vec<SandwichRow>,
    /// Counts for the `W` of each nested sub-sample, degrees recomputed.
    pub resampled: Vec<SandwichRow>,
    pub holds: bool,
}

/// Sandwich check for a size `n` between consecutive `d`-th powers.
///
/// One cloud of `m^d` points is sampled; the first `(m-1)^d` and first `n`
/// points form the nested sub-samples.
pub fn bridge_general_n(n: usize, d: usize, r: &Radius, lambdas: &[f64], seed: u64, tol: f64) -> Result<BridgeReport> {
    if n == 0 || d == 0 {
        return invalid("n and d must be >= 1");
    }
    r.check_dim(d)?;
    if integer_root(n, d).is_some() {
        return Ok(BridgeReport {
            d,
            n,
            lower_size: n,
            upper_size: n,
            seed,
            degenerate: true,
            principal: Vec::new(),
            resampled: Vec::new(),
            holds: true,
        });
    }
    let mut m = (n as f64).powf(1.0 / d as f64).floor() as usize;
    while checked_power(m, d).is_some_and(|p| p <= n) {
        m += 1;
    }
    while m > 1 && checked_power(m - 1, d).is_some_and(|p| p > n) {
        m -= 1;
    }
    let upper_size = checked_power(m, d).ok_or_else(|| crate::error::Error::InvalidArgument("size overflow".into()))?;
    let lower_size = checked_power(m - 1, d).unwrap_or(0);

    let cloud = sample_uniform_cube(upper_size, d, seed)?;
    let w_upper = w_matrix(&cloud, r)?;
    let upper = symmetric_eigenvalues(&w_upper, tol)?;

    let lower_keep: Vec<usize> = (0..lower_size).collect();
    let middle_keep: Vec<usize> = (0..n).collect();
    let p_lower = symmetric_eigenvalues(&principal_submatrix(&w_upper, &lower_keep)?, tol)?;
    let p_middle = symmetric_eigenvalues(&principal_submatrix(&w_upper, &middle_keep)?, tol)?;
    let r_lower = w_spectrum(&cloud.prefix(lower_size)?, r, tol)?;
    let r_middle = w_spectrum(&cloud.prefix(n)?, r, tol)?;

    let principal: Vec<SandwichRow> = lambdas
        .iter()
        .map(|&l| SandwichRow::new(l, [&p_lower, &p_middle, &upper]))
        .collect();
    let resampled: Vec<SandwichRow> = lambdas
        .iter()
        .map(|&l| SandwichRow::new(l, [&r_lower, &r_middle, &upper]))
        .collect();
    let holds = principal.iter().chain(&resampled).all(|row| row.holds);
    Ok(BridgeReport {
        d,
        n,
        lower_size,
        upper_size,
        seed,
        degenerate: false,
        principal,
        resampled,
        holds,
    })
}

/// One trial of the `r = 1` window experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowTrial {
    pub seed: u64,
    pub profile: MultiplicityProfile,
    /// Eigenvalues inside any of the requested gap intervals.
    pub gap_count: usize,
    /// The `1 + d + C(d,2)` largest eigenvalues.
    pub top: Vec<f64>,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

/// Window counts of `W_{n,1}` over several seeded clouds. `gaps` lists open
/// intervals expected to be empty at large `n`.
pub fn window_experiment(
    d: usize,
    n: usize,
    delta: f64,
    gaps: &[(f64, f64)],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<WindowTrial>> {
    multiplicity_windows(d, delta)?;
    if trials == 0 {
        return invalid("trials must be >= 1");
    }
    let r = Radius::new(1.0)?;
    let top_k = (1 + d + binomial(d, 2)).min(n);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let spec = w_spectrum(&sample_uniform_cube(n, d, s)?, &r, tol)?;
            Ok(WindowTrial {
                seed: s,
                profile: multiplicity_profile_of(&spec, d, delta)?,
                gap_count: gaps.iter().map(|&(lo, hi)| spec.count_in(lo, hi)).sum(),
                top: spec.values()[..top_k].to_vec(),
                lambda_max: spec.largest(),
                lambda_min: spec.smallest(),
            })
        })
        .collect()
}

/// JSON envelope shared by all experiment outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub experiment: String,
    pub params: Value,
    pub per_trial: Value,
    pub summary: Value,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn new(
        experiment: &str,
        params: impl Serialize,
        per_trial: impl Serialize,
        summary: impl Serialize,
        pass: bool,
    ) -> Result<Self> {
        Ok(Self {
            schema: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            params: serde_json::to_value(params)?,
            per_trial: serde_json::to_value(per_trial)?,
            summary: serde_json::to_value(summary)?,
            pass,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}
