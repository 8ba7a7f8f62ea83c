use crate::error::{Error, Result};

use super::matrix::DenseMatrix;

/// Default relative tolerance for [`symmetric_eig`].
pub const DEFAULT_EIG_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: DenseMatrix,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigensolver.
///
/// Rotations are applied sweep by sweep until the off-diagonal Frobenius norm
/// drops below `tol·‖m‖_F`. The input must be symmetric to within the same
/// relative tolerance.
pub fn symmetric_eig(m: &DenseMatrix, tol: f64) -> Result<SymmetricEigen> {
    m.check_square("symmetric_eig")?;
    if !m.is_finite() {
        return Err(Error::Domain("symmetric_eig: non-finite entries".into()));
    }
    let n = m.rows();
    let scale = m.frobenius_norm();
    if m.asymmetry() > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!(
            "symmetric_eig: matrix is not symmetric (max |a_ij - a_ji| = {:.3e})",
            m.asymmetry()
        )));
    }

    let mut a = m.clone();
    // symmetrise exactly so rotations see a consistent matrix
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v = DenseMatrix::identity(n);
    let threshold = tol * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold || scale == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "symmetric_eig: no convergence after {MAX_SWEEPS} sweeps (off-diagonal norm {off:.3e})"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, t);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[(r, p)];
            let arq = a[(r, q)];
            let new_rp = c * arp - s * arq;
            let new_rq = s * arp + c * arq;
            a[(r, p)] = new_rp;
            a[(p, r)] = new_rp;
            a[(r, q)] = new_rq;
            a[(q, r)] = new_rq;
        }
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}
