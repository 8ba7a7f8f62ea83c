//! High-fidelity model: control-volume assembly of `Aφ = λBφ` and the power
//! method used by every solver in the crate.

use serde::{Deserialize, Serialize};

use crate::core_model::{Boundary, Case, Geometry, MaterialField, RodConfig};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{gauss_seidel, DenseMatrix, SweepOperator};

/// Diffusion coefficient given to ghost cells, so `½·max{D_ghost + D, 0}`
/// removes every boundary face from the stencil.
pub const GHOST_DIFFUSION: f64 = -1e30;

pub const DEFAULT_MAX_OUTER: usize = 1000;
pub const DEFAULT_K_TOL: f64 = 1e-8;
pub const DEFAULT_INNER_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

/// Symmetric 3-point (1D) or 5-point (2D) operator on a structured grid,
/// stored band by band. Off-diagonal bands hold the (non-positive) matrix
/// entries coupling a cell to its west/east/south/north neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilMatrix {
    pub nx: usize,
    pub ny: usize,
    pub diag: Vec<f64>,
    pub west: Vec<f64>,
    pub east: Vec<f64>,
    pub south: Vec<f64>,
    pub north: Vec<f64>,
}

impl StencilMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `y = A·x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let nx = self.nx;
        let n = self.dim();
        for c in 0..n {
            let mut acc = self.diag[c] * x[c];
            if c % nx != 0 {
                acc += self.west[c] * x[c - 1];
            }
            if c % nx != nx - 1 {
                acc += self.east[c] * x[c + 1];
            }
            if c >= nx {
                acc += self.south[c] * x[c - nx];
            }
            if c + nx < n {
                acc += self.north[c] * x[c + nx];
            }
            y[c] = acc;
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            m.set_column(j, &col);
            e[j] = 0.0;
        }
        m
    }
}

impl SweepOperator for StencilMatrix {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    #[inline]
    fn diagonal_entry(&self, i: usize) -> f64 {
        self.diag[i]
    }

    #[inline]
    fn off_diagonal_dot(&self, c: usize, x: &[f64]) -> f64 {
        let nx = self.nx;
        let mut acc = 0.0;
        if c % nx != 0 {
            acc += self.west[c] * x[c - 1];
        }
        if c % nx != nx - 1 {
            acc += self.east[c] * x[c + 1];
        }
        if c >= nx {
            acc += self.south[c] * x[c - nx];
        }
        if c + nx < x.len() {
            acc += self.north[c] * x[c + nx];
        }
        acc
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Assembled generalised eigenproblem `Aφ = λBφ` over the interior cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    /// Transport operator (diffusion plus absorption).
    pub a: StencilMatrix,
    /// Diagonal of the fission operator, `νΣf` per cell.
    pub b: Vec<f64>,
}

impl DiscreteSystem {
    pub fn n_dof(&self) -> usize {
        self.b.len()
    }

    pub fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        self.a.apply(x)
    }

    pub fn apply_b(&self, x: &[f64]) -> Vec<f64> {
        self.b.iter().zip(x).map(|(b, x)| b * x).collect()
    }

    /// Total fission source `bᵀBφ` with `b` the all-ones vector.
    pub fn fission_source(&self, x: &[f64]) -> f64 {
        self.b.iter().zip(x).map(|(b, x)| b * x).sum()
    }

    /// `bᵀAφ`.
    pub fn total_removal(&self, x: &[f64]) -> f64 {
        self.apply_a(x).iter().sum()
    }

    /// `bᵀAφ / bᵀBφ`, the eigenvalue estimate consistent with `φ`. Falls back
    /// to 1 when the quotient is not a positive number.
    pub fn rayleigh_lambda(&self, x: &[f64]) -> f64 {
        let lam = self.total_removal(x) / self.fission_source(x);
        if lam.is_finite() && lam > 0.0 { lam } else { 1.0 }
    }

    /// `A·M` for a dense `N × P` matrix, one stencil product per column.
    pub fn a_times(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim("DiscreteSystem::a_times", self.n_dof(), m.rows())?;
        let mut out = DenseMatrix::zeros(m.rows(), m.cols());
        let mut y = vec![0.0; m.rows()];
        for j in 0..m.cols() {
            self.a.apply_into(&m.column(j), &mut y);
            out.set_column(j, &y);
        }
        Ok(out)
    }

    /// `B·M` for a dense `N × P` matrix.
    pub fn b_times(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim("DiscreteSystem::b_times", self.n_dof(), m.rows())?;
        Ok(DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| self.b[i] * m[(i, j)]))
    }
}

/// Face coefficient `½·max{D₁ + D₂, 0}/Δ²`.
#[inline]
fn face_coefficient(d1: f64, d2: f64, spacing: f64) -> f64 {
    0.5 * (d1 + d2).max(0.0) / (spacing * spacing)
}

/// Control-volume assembly over the interior cells of `geom`.
///
/// Exterior faces couple to ghost cells with [`GHOST_DIFFUSION`]; bare edges
/// add `1/(2Δx)` (or `1/(2Δy)`) to the absorption of the adjacent cell.
pub fn assemble(field: &MaterialField, geom: &Geometry) -> Result<DiscreteSystem> {
    let (nx, ny) = (geom.nx, geom.ny);
    let n = nx * ny;
    check_dim("assemble material cells", n, field.cells.len())?;
    check_dim("assemble diffusion coefficients", n, field.diffusion.len())?;

    let d = &field.diffusion;
    let mut a = StencilMatrix {
        nx,
        ny,
        diag: vec![0.0; n],
        west: vec![0.0; n],
        east: vec![0.0; n],
        south: vec![0.0; n],
        north: vec![0.0; n],
    };

    for j in 0..ny {
        for i in 0..nx {
            let c = i + nx * j;
            let mut sigma_a = field.cells[c].sigma_a;

            let dw = if i > 0 { d[c - 1] } else { GHOST_DIFFUSION };
            let de = if i + 1 < nx { d[c + 1] } else { GHOST_DIFFUSION };
            let kw = face_coefficient(d[c], dw, geom.dx);
            let ke = face_coefficient(d[c], de, geom.dx);
            a.west[c] = -kw;
            a.east[c] = -ke;
            a.diag[c] += kw + ke;
            if i == 0 && geom.boundary.left == Boundary::Bare {
                sigma_a += 0.5 / geom.dx;
            }
            if i + 1 == nx && geom.boundary.right == Boundary::Bare {
                sigma_a += 0.5 / geom.dx;
            }

            if geom.dims == 2 {
                let ds = if j > 0 { d[c - nx] } else { GHOST_DIFFUSION };
                let dn = if j + 1 < ny { d[c + nx] } else { GHOST_DIFFUSION };
                let ks = face_coefficient(d[c], ds, geom.dy);
                let kn = face_coefficient(d[c], dn, geom.dy);
                a.south[c] = -ks;
                a.north[c] = -kn;
                a.diag[c] += ks + kn;
                if j == 0 && geom.boundary.bottom == Boundary::Bare {
                    sigma_a += 0.5 / geom.dy;
                }
                if j + 1 == ny && geom.boundary.top == Boundary::Bare {
                    sigma_a += 0.5 / geom.dy;
                }
            }
            a.diag[c] += sigma_a;
        }
    }

    let b = field.cells.iter().map(|xs| xs.nu_sigma_f()).collect();
    Ok(DiscreteSystem { a, b })
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub flux: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves the fixed-source problem inside one outer iteration: given the
/// normalised flux and eigenvalue from the outer loop, return the new
/// (unnormalised) flux.
pub trait InnerSolver {
    fn solve(&mut self, sys: &DiscreteSystem, flux: &[f64], lambda: f64) -> Result<InnerOutcome>;
}

/// Forward/backward Gauss-Seidel on `Aφ = λBφ_old`, warm-started from `φ_old`.
#[derive(Debug, Clone, Copy)]
pub struct GaussSeidelInner {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for GaussSeidelInner {
    fn default() -> Self {
        Self {
            tol: DEFAULT_INNER_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

impl InnerSolver for GaussSeidelInner {
    fn solve(&mut self, sys: &DiscreteSystem, flux: &[f64], lambda: f64) -> Result<InnerOutcome> {
        let rhs: Vec<f64> = sys.b.iter().zip(flux).map(|(b, f)| lambda * b * f).collect();
        let out = gauss_seidel(&sys.a, &rhs, flux, self.tol, self.max_sweeps)?;
        Ok(InnerOutcome {
            flux: out.x,
            iterations: out.sweeps,
            converged: out.converged,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSettings {
    pub max_outer: usize,
    pub k_tol: f64,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            max_outer: DEFAULT_MAX_OUTER,
            k_tol: DEFAULT_K_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalitySolution {
    /// Normalised to a unit fission source, `bᵀBφ = 1`.
    pub flux: Vec<f64>,
    pub lambda: f64,
    pub k_eff: f64,
    /// `k_eff` after each outer iteration.
    pub history: Vec<f64>,
    pub converged: bool,
    pub outer_iters: usize,
    /// Inner iterations (or sweeps) used by each outer iteration.
    pub inner_iterations: Vec<usize>,
    /// Outer iterations whose inner solve stopped at its cap.
    pub inner_failures: usize,
}

/// Power method outer iterations.
///
/// Each pass solves the inner problem, normalises the flux to a unit fission
/// source, updates `λ = bᵀAφ / bᵀBφ`, and stops when successive `k_eff = 1/λ`
/// differ by less than `settings.k_tol` or after `settings.max_outer` passes.
pub fn power_method(
    sys: &DiscreteSystem,
    flux_guess: &[f64],
    lambda_guess: f64,
    inner: &mut dyn InnerSolver,
    settings: PowerSettings,
) -> Result<CriticalitySolution> {
    check_dim("power_method flux guess", sys.n_dof(), flux_guess.len())?;
    if !(lambda_guess > 0.0 && lambda_guess.is_finite()) {
        return Err(Error::Domain(format!("power_method: lambda guess {lambda_guess} must be positive")));
    }
    if sys.fission_source(flux_guess) == 0.0 {
        return Err(Error::Domain(
            "power_method: initial fission source is zero (no fissile material under the guess)".into(),
        ));
    }

    let mut flux = flux_guess.to_vec();
    let mut lambda = lambda_guess;
    let mut k_prev = 1.0 / lambda;
    let mut history = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut inner_failures = 0;
    let mut converged = false;

    for _ in 0..settings.max_outer {
        let out = inner.solve(sys, &flux, lambda)?;
        inner_iterations.push(out.iterations);
        if !out.converged {
            inner_failures += 1;
        }
        let source = sys.fission_source(&out.flux);
        if source == 0.0 || !source.is_finite() {
            return Err(Error::Domain(format!(
                "power_method: fission source of the inner solution is {source}"
            )));
        }
        flux = out.flux;
        flux.iter_mut().for_each(|v| *v /= source);
        lambda = sys.total_removal(&flux) / sys.fission_source(&flux);
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::Numeric(format!("power_method: eigenvalue estimate {lambda}")));
        }
        let k = 1.0 / lambda;
        history.push(k);
        if (k - k_prev).abs() < settings.k_tol {
            converged = true;
            break;
        }
        k_prev = k;
    }

    Ok(CriticalitySolution {
        outer_iters: history.len(),
        k_eff: 1.0 / lambda,
        flux,
        lambda,
        history,
        converged,
        inner_iterations,
        inner_failures,
    })
}

/// Flat flux normalised to a unit fission source.
pub fn flat_guess(sys: &DiscreteSystem) -> Result<Vec<f64>> {
    let ones = vec![1.0; sys.n_dof()];
    let source = sys.fission_source(&ones);
    if source <= 0.0 {
        return Err(Error::Domain("no fissile material in the system".into()));
    }
    Ok(ones.into_iter().map(|v| v / source).collect())
}

/// Assembled system for one rod configuration.
pub fn assemble_case(case: &Case, config: &RodConfig) -> Result<DiscreteSystem> {
    assemble(&case.material_field(config)?, &case.geometry)
}

/// Full high-fidelity solve for one rod configuration from a flat guess and `λ = 1`.
pub fn solve_case(case: &Case, config: &RodConfig) -> Result<CriticalitySolution> {
    let sys = assemble_case(case, config)?;
    solve_system(&sys)
}

/// Power method with Gauss-Seidel inner solves on an assembled system.
pub fn solve_system(sys: &DiscreteSystem) -> Result<CriticalitySolution> {
    let guess = flat_guess(sys)?;
    power_method(sys, &guess, 1.0, &mut GaussSeidelInner::default(), PowerSettings::default())
}
