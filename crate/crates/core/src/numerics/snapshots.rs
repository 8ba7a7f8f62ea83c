use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::eigen::{symmetric_eig, DEFAULT_EIG_TOL};
use super::matrix::{axpy, dot, DenseMatrix};

/// Eigenvalues of `SᵀS` at or below this fraction of the largest are treated as null.
pub const RANK_TOL: f64 = 1e-12;

/// Thin singular value decomposition restricted to the non-null modes.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `N × r` matrix with orthonormal columns (the POD modes).
    pub left_vectors: DenseMatrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Fraction of `Σσ²` carried by the leading `count` modes.
    pub fn capture_fraction(&self, count: usize) -> f64 {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 0.0;
        }
        let head: f64 = self.singular_values[..count.min(self.rank())]
            .iter()
            .map(|s| s * s)
            .sum();
        head / total
    }
}

/// How many modes [`truncate_basis`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Smallest count capturing at least this fraction of `Σσ²`.
    Fraction(f64),
    /// Exactly this many modes.
    Count(usize),
}

/// POD modes of the snapshot matrix `s` (one snapshot per column) through the
/// `M × M` correlation matrix `SᵀS`.
pub fn method_of_snapshots(s: &DenseMatrix) -> Result<SvdResult> {
    let (n, m) = s.shape();
    if n == 0 || m == 0 {
        return Err(Error::Domain("method_of_snapshots: empty snapshot matrix".into()));
    }
    if !s.is_finite() {
        return Err(Error::Domain("method_of_snapshots: non-finite snapshot entries".into()));
    }
    if s.max_abs() == 0.0 {
        return Err(Error::Domain("method_of_snapshots: all-zero snapshot matrix".into()));
    }

    let gram = s.tr_matmul(s)?;
    let eig = symmetric_eig(&gram, DEFAULT_EIG_TOL)?;
    let mu_max = eig.eigenvalues[0];
    let kept: Vec<usize> = (0..m)
        .filter(|&k| eig.eigenvalues[k] > RANK_TOL * mu_max)
        .collect();

    let mut singular_values = Vec::with_capacity(kept.len());
    let mut modes: Vec<Vec<f64>> = Vec::with_capacity(kept.len());
    for &k in &kept {
        let mu = eig.eigenvalues[k];
        let phi = eig.eigenvectors.column(k);
        let mut psi = s.matvec(&phi)?;
        let inv = 1.0 / mu.sqrt();
        psi.iter_mut().for_each(|v| *v *= inv);
        singular_values.push(mu.sqrt());
        modes.push(psi);
    }

    // Modes with small μ inherit roundoff amplified by μ₁/μ; a second
    // Gram-Schmidt pass restores orthonormality to working precision.
    reorthonormalize(&mut modes);
    for psi in &mut modes {
        fix_sign(psi);
    }

    Ok(SvdResult {
        singular_values,
        left_vectors: DenseMatrix::from_columns(&modes)?,
    })
}

/// Leading columns of the left singular vectors selected by `criterion`.
pub fn truncate_basis(svd: &SvdResult, criterion: Truncation) -> Result<DenseMatrix> {
    let count = truncation_count(svd, criterion)?;
    Ok(svd.left_vectors.leading_columns(count))
}

/// Number of modes kept by `criterion`.
pub fn truncation_count(svd: &SvdResult, criterion: Truncation) -> Result<usize> {
    match criterion {
        Truncation::Count(p) => {
            if p == 0 || p > svd.rank() {
                return Err(Error::Domain(format!(
                    "truncate_basis: requested {p} modes, {} available",
                    svd.rank()
                )));
            }
            Ok(p)
        }
        Truncation::Fraction(gamma) => {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(Error::Domain(format!(
                    "truncate_basis: capture fraction {gamma} outside (0, 1]"
                )));
            }
            let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
            let mut acc = 0.0;
            for (i, s) in svd.singular_values.iter().enumerate() {
                acc += s * s;
                if acc / total >= gamma {
                    return Ok(i + 1);
                }
            }
            Ok(svd.rank())
        }
    }
}

fn reorthonormalize(vectors: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for k in 0..vectors.len() {
            let (done, rest) = vectors.split_at_mut(k);
            let v = &mut rest[0];
            for q in done.iter() {
                let proj = dot(q, v);
                axpy(-proj, q, v);
            }
            let norm = dot(v, v).sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }
}

/// Flips `v` so its largest-magnitude entry is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
