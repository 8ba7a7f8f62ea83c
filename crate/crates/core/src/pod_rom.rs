//! POD-Galerkin reduced-order model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hfm::{
    flat_guess, power_method, CriticalitySolution, DiscreteSystem, InnerOutcome, InnerSolver,
    PowerSettings,
};
use crate::numerics::{
    gaussian_elimination, io, method_of_snapshots, truncation_count, DenseMatrix, SvdResult,
    Truncation,
};

/// Truncated orthonormal POD basis.
#[derive(Debug, Clone)]
pub struct PodBasis {
    /// `N × P`, orthonormal columns.
    pub r: DenseMatrix,
    /// Retained singular values.
    pub singular_values: Vec<f64>,
    /// Fraction of `Σσ²` carried by the retained modes.
    pub capture_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BasisSidecar {
    p: usize,
    n: usize,
    capture_fraction: f64,
    singular_values: Vec<f64>,
}

impl PodBasis {
    pub fn from_svd(svd: &SvdResult, criterion: Truncation) -> Result<Self> {
        let p = truncation_count(svd, criterion)?;
        Ok(Self {
            r: svd.left_vectors.leading_columns(p),
            singular_values: svd.singular_values[..p].to_vec(),
            capture_fraction: svd.capture_fraction(p),
        })
    }

    /// POD basis of the snapshot columns of `snapshots`.
    pub fn from_snapshots(snapshots: &DenseMatrix, criterion: Truncation) -> Result<Self> {
        Self::from_svd(&method_of_snapshots(snapshots)?, criterion)
    }

    pub fn n_dof(&self) -> usize {
        self.r.rows()
    }

    pub fn dim(&self) -> usize {
        self.r.cols()
    }

    /// `α = Rᵀφ`.
    pub fn project(&self, flux: &[f64]) -> Result<Vec<f64>> {
        check_dim("PodBasis::project", self.n_dof(), flux.len())?;
        self.r.tr_matvec(flux)
    }

    /// `φ = Rα`.
    pub fn reconstruct(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        check_dim("PodBasis::reconstruct", self.dim(), alpha.len())?;
        self.r.matvec(alpha)
    }

    /// Orthogonal projection `RRᵀφ`.
    pub fn project_onto_span(&self, flux: &[f64]) -> Result<Vec<f64>> {
        self.reconstruct(&self.project(flux)?)
    }

    /// Writes `<stem>.bin` (basis in the binary matrix format) and `<stem>.json`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        io::save_matrix(dir.join(format!("{stem}.bin")), &self.r)?;
        let sidecar = BasisSidecar {
            p: self.dim(),
            n: self.n_dof(),
            capture_fraction: self.capture_fraction,
            singular_values: self.singular_values.clone(),
        };
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let r = io::load_matrix(dir.join(format!("{stem}.bin")))?;
        let sidecar: BasisSidecar =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        if sidecar.p != r.cols() || sidecar.n != r.rows() {
            return Err(Error::Format(format!(
                "basis sidecar says {}x{}, matrix is {}x{}",
                sidecar.n,
                sidecar.p,
                r.rows(),
                r.cols()
            )));
        }
        Ok(Self {
            r,
            singular_values: sidecar.singular_values,
            capture_fraction: sidecar.capture_fraction,
        })
    }
}

/// Galerkin-projected operators `RᵀAR` and `RᵀBR`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub ar: DenseMatrix,
    pub br: DenseMatrix,
}

pub fn reduce_system(sys: &DiscreteSystem, basis: &PodBasis) -> Result<ReducedSystem> {
    check_dim("reduce_system", sys.n_dof(), basis.n_dof())?;
    let ar = basis.r.tr_matmul(&sys.a_times(&basis.r)?)?;
    let br = basis.r.tr_matmul(&sys.b_times(&basis.r)?)?;
    Ok(ReducedSystem { ar, br })
}

/// Inner solver of the POD ROM: one direct solve of `(RᵀAR)α = λ(RᵀB)φ`.
#[derive(Debug, Clone)]
pub struct PodInner<'a> {
    basis: &'a PodBasis,
    ar: DenseMatrix,
    /// `RᵀB`, `P × N`.
    rt_b: DenseMatrix,
}

impl<'a> PodInner<'a> {
    /// Projects the operators of `sys` onto `basis`.
    pub fn new(sys: &DiscreteSystem, basis: &'a PodBasis) -> Result<Self> {
        check_dim("PodInner", sys.n_dof(), basis.n_dof())?;
        let ar = basis.r.tr_matmul(&sys.a_times(&basis.r)?)?;
        let rt_b = DenseMatrix::from_fn(basis.dim(), basis.n_dof(), |k, i| basis.r[(i, k)] * sys.b[i]);
        Ok(Self { basis, ar, rt_b })
    }

    pub fn reduced_transport(&self) -> &DenseMatrix {
        &self.ar
    }
}

/// One POD inner step: `s = λ(RᵀB)φ`, solve `(RᵀAR)α = s`, return `Rα`.
pub fn pod_inner_iteration(
    sys: &DiscreteSystem,
    basis: &PodBasis,
    flux: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    PodInner::new(sys, basis)?.step(flux, lambda)
}

impl PodInner<'_> {
    fn step(&self, flux: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let mut s = self.rt_b.matvec(flux)?;
        s.iter_mut().for_each(|v| *v *= lambda);
        let alpha = gaussian_elimination(&self.ar, &s)
            .map_err(|e| Error::Numeric(format!("POD reduced system: {e}")))?;
        self.basis.reconstruct(&alpha)
    }
}

impl InnerSolver for PodInner<'_> {
    fn solve(&mut self, _sys: &DiscreteSystem, flux: &[f64], lambda: f64) -> Result<InnerOutcome> {
        Ok(InnerOutcome {
            flux: self.step(flux, lambda)?,
            iterations: 1,
            converged: true,
        })
    }
}

/// Flat unit-fission flux projected into `span(R)`.
pub fn pod_initial_flux(sys: &DiscreteSystem, basis: &PodBasis) -> Result<Vec<f64>> {
    basis.project_onto_span(&flat_guess(sys)?)
}

/// Power method on the POD-Galerkin system.
pub fn solve_pod_rom(
    sys: &DiscreteSystem,
    basis: &PodBasis,
    flux_guess: &[f64],
    lambda_guess: f64,
) -> Result<CriticalitySolution> {
    let mut inner = PodInner::new(sys, basis)?;
    power_method(sys, flux_guess, lambda_guess, &mut inner, PowerSettings::default())
}

/// [`solve_pod_rom`] from the projected flat guess and its own eigenvalue
/// estimate.
pub fn solve_pod_rom_default(sys: &DiscreteSystem, basis: &PodBasis) -> Result<CriticalitySolution> {
    let guess = pod_initial_flux(sys, basis)?;
    solve_pod_rom(sys, basis, &guess, sys.rayleigh_lambda(&guess))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_model::{Boundary, Case, EdgeBoundaries, RodConfig};
    use crate::hfm::assemble_case;

    fn identity_basis(n: usize) -> PodBasis {
        PodBasis {
            r: DenseMatrix::identity(n),
            singular_values: vec![1.0; n],
            capture_fraction: 1.0,
        }
    }

    #[test]
    fn identity_basis_projection() {
        let basis = identity_basis(4);
        let phi = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(basis.project(&phi).unwrap(), phi);
        assert_eq!(basis.reconstruct(&[0.0; 4]).unwrap(), vec![0.0; 4]);
        assert!(basis.project(&[1.0; 3]).is_err());
    }

    #[test]
    fn orthogonal_flux_projects_to_zero() {
        let r = DenseMatrix::from_columns(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let basis = PodBasis { r, singular_values: vec![1.0, 1.0], capture_fraction: 1.0 };
        assert_eq!(basis.project(&[0.0, 0.0, 7.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(basis.reconstruct(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn flat_mode_gives_infinite_medium_k() {
        let case = Case::slab1d().with_boundary(EdgeBoundaries::uniform(Boundary::Reflective));
        let sys = assemble_case(&case, &RodConfig::new(vec![0.0, 0.0]).unwrap()).unwrap();
        let n = sys.n_dof();
        let r = DenseMatrix::from_vec(n, 1, vec![1.0 / (n as f64).sqrt(); n]).unwrap();
        let basis = PodBasis { r, singular_values: vec![1.0], capture_fraction: 1.0 };
        let red = reduce_system(&sys, &basis).unwrap();
        assert!((red.ar[(0, 0)] / red.br[(0, 0)] - 0.45 / 0.5).abs() < 1e-12);
        let sol = solve_pod_rom_default(&sys, &basis).unwrap();
        assert!((sol.k_eff - 0.5 / 0.45).abs() < 1e-10);
        let flux = pod_inner_iteration(&sys, &basis, &sol.flux, sol.lambda).unwrap();
        let lambda = sys.total_removal(&flux) / sys.fission_source(&flux);
        assert!((lambda - 0.9).abs() < 1e-12);
    }
}
