//! Dense linear-algebra kernels: matrices, direct and iterative solvers, the
//! Jacobi symmetric eigensolver and POD through the method of snapshots.

mod eigen;
pub mod io;
mod matrix;
mod snapshots;
mod solve;

pub use eigen::{symmetric_eig, SymmetricEigen, DEFAULT_EIG_TOL};
pub(crate) use matrix::gemm;
pub use matrix::{axpy, dot, norm2, norm_inf, DenseMatrix};
pub use snapshots::{
    method_of_snapshots, truncate_basis, truncation_count, SvdResult, Truncation, RANK_TOL,
};
pub use solve::{gauss_seidel, gaussian_elimination, GaussSeidelOutcome, SweepOperator};
