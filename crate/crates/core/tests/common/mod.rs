//! Brute-force oracles kept independent of the library's kernels.

#![allow(dead_code)]

use critrom::hfm::DiscreteSystem;

/// Row-major dense copy of a square matrix given as `n × n` rows.
pub fn dense_rows(sys: &DiscreteSystem) -> Vec<Vec<f64>> {
    let n = sys.n_dof();
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            sys.apply_a(&e)
        })
        // apply_a(e_i) is column i; A is symmetric, so it is also row i
        .collect()
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                assert!(d > 0.0, "matrix not positive definite");
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Inverse of a lower triangular matrix.
pub fn lower_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        for i in c..n {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = (c..i).map(|k| l[i][k] * inv[k][c]).sum();
            inv[i][c] = (rhs - s) / l[i][i];
        }
    }
    inv
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a = m.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let total: f64 = a.iter().flatten().map(|v| v * v).sum();
        if off <= 1e-30 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Dominant eigenvalue of `A⁻¹B`, i.e. `k_eff`, through the symmetric
/// similar matrix `B^{1/2} L⁻ᵀ L⁻¹ B^{1/2}` with `A = LLᵀ`.
pub fn brute_force_keff(sys: &DiscreteSystem) -> f64 {
    let a = dense_rows(sys);
    let linv = lower_inverse(&cholesky(&a));
    let n = a.len();
    let sb: Vec<f64> = sys.b.iter().map(|b| b.sqrt()).collect();
    // M = (L⁻¹ B^{1/2})ᵀ (L⁻¹ B^{1/2})
    let g: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| linv[i][j] * sb[j]).collect()).collect();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| g[k][i] * g[k][j]).sum()).collect())
        .collect();
    *jacobi_eigenvalues(&m).last().unwrap()
}
