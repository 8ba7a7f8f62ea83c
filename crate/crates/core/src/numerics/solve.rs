use crate::error::{check_dim, Error, Result};

use super::matrix::{dot, norm_inf, DenseMatrix};

/// Row access needed by Gauss-Seidel sweeps.
///
/// Implemented by [`DenseMatrix`] and by the banded stencil operator of the
/// high-fidelity model.
pub trait SweepOperator {
    fn dim(&self) -> usize;
    fn diagonal_entry(&self, i: usize) -> f64;
    /// `Σ_{j≠i} a_ij x_j`.
    fn off_diagonal_dot(&self, i: usize, x: &[f64]) -> f64;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

impl SweepOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn diagonal_entry(&self, i: usize) -> f64 {
        self[(i, i)]
    }

    fn off_diagonal_dot(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.row(i), x) - self[(i, i)] * x[i]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|i| dot(self.row(i), x)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GaussSeidelOutcome {
    pub x: Vec<f64>,
    /// Individual sweeps performed (a forward/backward pair counts as two).
    pub sweeps: usize,
    pub converged: bool,
    /// Final `‖Ax − rhs‖_∞`.
    pub residual: f64,
}

/// Symmetric Gauss-Seidel: alternating forward and backward sweeps until
/// `‖Ax − rhs‖_∞ ≤ tol·‖rhs‖_∞` or `max_sweeps` is reached.
///
/// Hitting the sweep cap is not an error; the outcome carries `converged = false`.
pub fn gauss_seidel<A: SweepOperator + ?Sized>(
    a: &A,
    rhs: &[f64],
    x0: &[f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<GaussSeidelOutcome> {
    let n = a.dim();
    check_dim("gauss_seidel rhs", n, rhs.len())?;
    check_dim("gauss_seidel x0", n, x0.len())?;
    if let Some(i) = (0..n).find(|&i| a.diagonal_entry(i) == 0.0) {
        return Err(Error::Domain(format!("gauss_seidel: zero diagonal entry in row {i}")));
    }

    let target = tol * norm_inf(rhs);
    let mut x = x0.to_vec();
    let residual_of = |x: &[f64]| {
        a.apply(x)
            .iter()
            .zip(rhs)
            .fold(0.0_f64, |m, (ax, b)| m.max((ax - b).abs()))
    };

    let mut residual = residual_of(&x);
    let mut sweeps = 0;
    while residual > target && sweeps < max_sweeps {
        let forward = sweeps % 2 == 0;
        if forward {
            for i in 0..n {
                x[i] = (rhs[i] - a.off_diagonal_dot(i, &x)) / a.diagonal_entry(i);
            }
        } else {
            for i in (0..n).rev() {
                x[i] = (rhs[i] - a.off_diagonal_dot(i, &x)) / a.diagonal_entry(i);
            }
        }
        sweeps += 1;
        residual = residual_of(&x);
        if !residual.is_finite() {
            return Err(Error::Numeric("gauss_seidel: iterate became non-finite".into()));
        }
    }

    Ok(GaussSeidelOutcome {
        x,
        sweeps,
        converged: residual <= target,
        residual,
    })
}

/// Dense direct solve with partial pivoting.
pub fn gaussian_elimination(a: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    a.check_square("gaussian_elimination")?;
    let n = a.rows();
    check_dim("gaussian_elimination rhs", n, rhs.len())?;

    let mut m = a.clone();
    let mut b = rhs.to_vec();
    let singular_tol = f64::EPSILON * a.norm_inf() * n as f64;

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_abs > singular_tol) {
            return Err(Error::Numeric(format!(
                "gaussian_elimination: matrix is singular to working precision (pivot {pivot_abs:.3e} in column {col})"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = tmp;
            }
            b.swap(col, pivot_row);
        }
        let pivot = m[(col, col)];
        for r in (col + 1)..n {
            let factor = m[(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[(r, col)] = 0.0;
            for j in (col + 1)..n {
                m[(r, j)] -= factor * m[(col, j)];
            }
            b[r] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = ((i + 1)..n).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (b[i] - tail) / m[(i, i)];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("gaussian_elimination: non-finite solution".into()));
    }
    Ok(x)
}
