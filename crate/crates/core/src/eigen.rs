//! Full spectrum of dense real symmetric matrices.
//!
//! Householder reduction to tridiagonal form followed by implicit QL with
//! Wilkinson-type shifts; eigenvalues only. The reduction fuses the rank-2
//! update of one step with the matrix-vector product of the next so that
//! each step makes a single pass over the trailing block.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::export::{fmt17, write_csv_rows};
use crate::graph::SymmetricMatrix;

/// Default relative tolerance requested from the solver.
pub const DEFAULT_TOL: f64 = 1e-10;

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 50;

/// Eigenvalues sorted non-increasing, with the tolerance they were
/// requested at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    tol: f64,
}

impl Spectrum {
    /// Sorts `values` descending.
    pub fn new(mut values: Vec<f64>, tol: f64) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values, tol }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `i`-th largest eigenvalue, zero-based.
    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied()
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Eigenvalues with `|λ| > threshold`, order kept.
    pub fn truncated(&self, threshold: f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .copied()
                .filter(|v| v.abs() > threshold)
                .collect(),
            tol: self.tol,
        }
    }

    /// The first `k` values.
    pub fn top(&self, k: usize) -> Self {
        Self {
            values: self.values[..k.min(self.values.len())].to_vec(),
            tol: self.tol,
        }
    }

    /// Number of eigenvalues strictly inside `(lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.values.iter().filter(|&&v| v > lo && v < hi).count()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Largest `|a_i - b_i|` over two spectra of equal order.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.order() != other.order() {
            return invalid(format!(
                "spectra of different order: {} vs {}",
                self.order(),
                other.order()
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// CSV with header `rank,value`; ranks start at 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv_rows(
            out,
            Some("rank,value"),
            self.values
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![(i + 1).to_string(), fmt17(v)]),
        )
    }
}

/// All eigenvalues of `m`, sorted descending.
///
/// The solver always iterates to machine precision; `tol` is the relative
/// accuracy the caller relies on and is recorded in the result.
pub fn symmetric_eigenvalues(m: &SymmetricMatrix, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let n = m.order();
    if n == 0 {
        return Ok(Spectrum::new(Vec::new(), tol));
    }
    let (mut diag, mut off) = tridiagonalize(m.as_slice().to_vec(), n);
    tridiagonal_ql(&mut diag, &mut off)?;
    Ok(Spectrum::new(diag, tol))
}

/// Rows shorter than this are processed sequentially.
const PAR_MIN_BLOCK: usize = 192;

/// Reduces the row-major symmetric `a` to tridiagonal form. Returns the
/// diagonal and the off-diagonal, where `off[k]` couples `k` and `k + 1`
/// (`off[n - 1] = 0`).
fn tridiagonalize(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    // Rank-2 update H B H = B - v qᵀ - q vᵀ left over from the previous step,
    // indexed from the current row `k`.
    let mut pending: Option<(Vec<f64>, Vec<f64>)> = None;

    for k in 0..n {
        let row_k = &mut a[k * n + k..(k + 1) * n];
        if let Some((v, q)) = &pending {
            let (v0, q0) = (v[0], q[0]);
            for ((x, &vj), &qj) in row_k.iter_mut().zip(v).zip(q) {
                *x -= v0 * qj + q0 * vj;
            }
        }
        diag[k] = row_k[0];
        if k + 1 == n {
            break;
        }
        let x = &row_k[1..];
        let len = x.len();
        let scale = x.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let tail_sq: f64 = x[1..].iter().map(|v| (v / scale.max(f64::MIN_POSITIVE)).powi(2)).sum();

        let reflector = if len > 1 && scale > 0.0 && tail_sq > 0.0 {
            let x0 = x[0] / scale;
            let norm = (x0 * x0 + tail_sq).sqrt();
            let alpha = if x0 > 0.0 { -norm } else { norm };
            let mut u: Vec<f64> = x.iter().map(|v| v / scale).collect();
            u[0] -= alpha;
            // uᵀu = 2(‖x‖² + |x0|‖x‖) in scaled units
            let beta = 1.0 / (norm * norm + x0.abs() * norm);
            off[k] = alpha * scale;
            Some((u, beta))
        } else {
            off[k] = x[0];
            None
        };

        let trailing = &mut a[(k + 1) * n..];
        let p = update_and_multiply(trailing, n, k + 1, pending.as_ref(), reflector.as_ref());
        pending = match (reflector, p) {
            (Some((u, beta)), Some(mut p)) => {
                for v in &mut p {
                    *v *= beta;
                }
                let kk = 0.5 * beta * dot(&u, &p);
                let q: Vec<f64> = p.iter().zip(&u).map(|(pi, ui)| pi - kk * ui).collect();
                Some((u, q))
            }
            _ => None,
        };
    }
    (diag, off)
}

/// Applies the pending rank-2 update to rows `start..n` (columns
/// `start..n`) and, when a reflector is given, returns `B u` for the
/// updated trailing block `B`.
fn update_and_multiply(
    rows: &mut [f64],
    n: usize,
    start: usize,
    pending: Option<&(Vec<f64>, Vec<f64>)>,
    reflector: Option<&(Vec<f64>, f64)>,
) -> Option<Vec<f64>> {
    let work = |(r, row): (usize, &mut [f64])| -> f64 {
        let seg = &mut row[start..];
        if let Some((v, q)) = pending {
            // pending vectors start one index earlier than this block
            let (vi, qi) = (v[r + 1], q[r + 1]);
            for ((x, &vj), &qj) in seg.iter_mut().zip(&v[1..]).zip(&q[1..]) {
                *x -= vi * qj + qi * vj;
            }
        }
        match reflector {
            Some((u, _)) => dot(seg, u),
            None => 0.0,
        }
    };
    let block = n - start;
    let p: Vec<f64> = if block >= PAR_MIN_BLOCK {
        rows.par_chunks_mut(n).enumerate().map(work).collect()
    } else {
        rows.chunks_mut(n).enumerate().map(work).collect()
    };
    reflector.map(|_| p)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues overwrite
/// `diag`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    // Couplings below ε‖T‖ are at the level of the reduction's own rounding;
    // the relative test alone never fires between two near-zero entries.
    let norm = diag
        .iter()
        .zip(off.iter())
        .fold(0.0f64, |acc, (d, e)| acc.max(d.abs() + e.abs()));
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd || off[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NumericalFailure { iterations });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// `vᵀMv / vᵀv`.
pub fn rayleigh_quotient(m: &SymmetricMatrix, v: &[f64]) -> Result<f64> {
    let mv = m.mul_vec(v)?;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv == 0.0 {
        return invalid("Rayleigh quotient of the zero vector");
    }
    Ok(dot(v, &mv) / vv)
}
