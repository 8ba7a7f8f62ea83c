//! Autoencoder-based projection ROM.
//!
//! The decoder is linearised around the current latent state by forward
//! differences, giving `C ≈ dφ/dα`, and the regularised reduced system
//! `(CᵀAC + ε I) Δα = Cᵀs − CᵀAφ` is iterated inside each power-method pass.

use serde::{Deserialize, Serialize};

use crate::autoencoder::Autoencoder;
use crate::error::{check_dim, Error, Result};
use crate::hfm::{flat_guess, power_method, CriticalitySolution, DiscreteSystem, InnerOutcome, InnerSolver, PowerSettings};
use crate::numerics::{gaussian_elimination, norm_inf, DenseMatrix};
use crate::pod_rom::PodBasis;

pub const DEFAULT_JACOBIAN_EPS: f64 = 1e-6;
pub const DEFAULT_MAX_INNER: usize = 100;
pub const DEFAULT_ALPHA_TOL: f64 = 1e-8;
pub const DEFAULT_RELATIVE_REG: f64 = 1e-8;

/// An encoder/decoder pair between flux space (`n_dof`) and latent space.
pub trait LatentMap: Sync {
    fn n_dof(&self) -> usize;
    fn latent_dim(&self) -> usize;
    fn encode(&self, flux: &[f64]) -> Result<Vec<f64>>;
    fn decode(&self, latent: &[f64]) -> Result<Vec<f64>>;

    fn reconstruct(&self, flux: &[f64]) -> Result<Vec<f64>> {
        self.decode(&self.encode(flux)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Pod,
    Ae,
    SvdAe,
}

impl ReductionKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Pod => "pod",
            Self::Ae => "ae",
            Self::SvdAe => "svd_ae",
        }
    }
}

#[derive(Debug, Clone)]
pub enum ReductionMap {
    /// `encode = Rᵀ·`, `decode = R·`.
    Pod(PodBasis),
    /// Autoencoder on the full flux; scaling happens inside.
    Ae(Autoencoder),
    /// `encode = AE_enc ∘ Rᵀ`, `decode = R ∘ AE_dec`.
    SvdAe { basis: PodBasis, ae: Autoencoder },
}

impl ReductionMap {
    pub fn kind(&self) -> ReductionKind {
        match self {
            Self::Pod(_) => ReductionKind::Pod,
            Self::Ae(_) => ReductionKind::Ae,
            Self::SvdAe { .. } => ReductionKind::SvdAe,
        }
    }
}

impl LatentMap for ReductionMap {
    fn n_dof(&self) -> usize {
        match self {
            Self::Pod(b) | Self::SvdAe { basis: b, .. } => b.n_dof(),
            Self::Ae(ae) => ae.input_dim(),
        }
    }

    fn latent_dim(&self) -> usize {
        match self {
            Self::Pod(b) => b.dim(),
            Self::Ae(ae) | Self::SvdAe { ae, .. } => ae.latent_dim(),
        }
    }

    fn encode(&self, flux: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Pod(b) => b.project(flux),
            Self::Ae(ae) => ae.encode(flux),
            Self::SvdAe { basis, ae } => ae.encode(&basis.project(flux)?),
        }
    }

    fn decode(&self, latent: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Pod(b) => b.reconstruct(latent),
            Self::Ae(ae) => ae.decode(latent),
            Self::SvdAe { basis, ae } => basis.reconstruct(&ae.decode(latent)?),
        }
    }
}

/// SVD-autoencoder map from a POD basis and an autoencoder trained on the
/// POD coefficients of the snapshots.
pub fn compose_svd_ae(basis: PodBasis, ae: Autoencoder) -> Result<ReductionMap> {
    check_dim("compose_svd_ae: autoencoder input", basis.dim(), ae.input_dim())?;
    Ok(ReductionMap::SvdAe { basis, ae })
}

/// Forward-difference Jacobian of a decoder at a latent anchor.
#[derive(Debug, Clone)]
pub struct LinearizedMap {
    /// `N × P`.
    pub c: DenseMatrix,
    pub anchor_latent: Vec<f64>,
    pub anchor_flux: Vec<f64>,
    pub epsilon: f64,
}

/// Column `k` of `C` is `(decode(α̃ + εe_k) − decode(α̃)) / ε`.
pub fn linearize_decoder<M: LatentMap + ?Sized>(map: &M, anchor: &[f64], epsilon: f64) -> Result<LinearizedMap> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("linearize_decoder: epsilon {epsilon} must be positive")));
    }
    check_dim("linearize_decoder anchor", map.latent_dim(), anchor.len())?;
    let anchor_flux = map.decode(anchor)?;
    if anchor_flux.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("decoder output at the anchor is not finite".into()));
    }
    let mut c = DenseMatrix::zeros(anchor_flux.len(), anchor.len());
    let mut probe = anchor.to_vec();
    for k in 0..anchor.len() {
        probe[k] = anchor[k] + epsilon;
        let col: Vec<f64> = map
            .decode(&probe)?
            .iter()
            .zip(&anchor_flux)
            .map(|(p, f)| (p - f) / epsilon)
            .collect();
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("decoder Jacobian column {k} is not finite")));
        }
        c.set_column(k, &col);
        probe[k] = anchor[k];
    }
    Ok(LinearizedMap {
        c,
        anchor_latent: anchor.to_vec(),
        anchor_flux,
        epsilon,
    })
}

/// Diagonal shift added to `CᵀAC`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    /// `factor · max diag(CᵀAC)`.
    Relative(f64),
    Absolute(f64),
}

impl Default for Regularization {
    fn default() -> Self {
        Self::Relative(DEFAULT_RELATIVE_REG)
    }
}

impl Regularization {
    fn shift(self, m: &DenseMatrix) -> f64 {
        match self {
            Self::Relative(f) => f * (0..m.rows()).map(|i| m[(i, i)]).fold(0.0, f64::max),
            Self::Absolute(e) => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeRomSettings {
    pub jacobian_eps: f64,
    pub regularization: Regularization,
    pub max_inner: usize,
    pub alpha_tol: f64,
    pub power: PowerSettings,
}

impl Default for AeRomSettings {
    fn default() -> Self {
        Self {
            jacobian_eps: DEFAULT_JACOBIAN_EPS,
            regularization: Regularization::default(),
            max_inner: DEFAULT_MAX_INNER,
            alpha_tol: DEFAULT_ALPHA_TOL,
            power: PowerSettings::default(),
        }
    }
}

/// Inner solver of the AE-ROM.
pub struct AeInner<'a, M: LatentMap + ?Sized> {
    map: &'a M,
    settings: AeRomSettings,
}

impl<'a, M: LatentMap + ?Sized> AeInner<'a, M> {
    pub fn new(map: &'a M, settings: AeRomSettings) -> Self {
        Self { map, settings }
    }
}

impl<M: LatentMap + ?Sized> InnerSolver for AeInner<'_, M> {
    fn solve(&mut self, sys: &DiscreteSystem, flux: &[f64], lambda: f64) -> Result<InnerOutcome> {
        check_dim("AE inner flux", sys.n_dof(), flux.len())?;
        check_dim("AE inner map", sys.n_dof(), self.map.n_dof())?;
        let s: Vec<f64> = sys.b.iter().zip(flux).map(|(b, f)| lambda * b * f).collect();
        let mut alpha = self.map.encode(flux)?;
        let mut phi = flux.to_vec();
        let st = &self.settings;

        for k in 1..=st.max_inner {
            let c = linearize_decoder(self.map, &alpha, st.jacobian_eps)?.c;
            let mut m = c.tr_matmul(&sys.a_times(&c)?)?;
            let shift = st.regularization.shift(&m);
            for i in 0..m.rows() {
                m[(i, i)] += shift;
            }
            let a_phi = sys.apply_a(&phi);
            let residual: Vec<f64> = s.iter().zip(&a_phi).map(|(s, a)| s - a).collect();
            let rhs = c.tr_matvec(&residual)?;
            let delta = gaussian_elimination(&m, &rhs)
                .map_err(|e| Error::Numeric(format!("AE reduced system at inner iteration {k}: {e}")))?;
            if delta.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite latent update at inner iteration {k}")));
            }
            let step = c.matvec(&delta)?;
            alpha.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
            phi.iter_mut().zip(&step).for_each(|(p, d)| *p += d);
            if norm_inf(&delta) < st.alpha_tol {
                return Ok(InnerOutcome {
                    flux: phi,
                    iterations: k,
                    converged: true,
                });
            }
        }
        Ok(InnerOutcome {
            flux: phi,
            iterations: st.max_inner,
            converged: false,
        })
    }
}

/// One call of the AE inner loop.
pub fn ae_inner_iterations<M: LatentMap + ?Sized>(
    sys: &DiscreteSystem,
    map: &M,
    flux: &[f64],
    lambda: f64,
    settings: AeRomSettings,
) -> Result<InnerOutcome> {
    AeInner::new(map, settings).solve(sys, flux, lambda)
}

/// Flat unit-fission flux passed through `decode ∘ encode`.
pub fn ae_initial_flux<M: LatentMap + ?Sized>(sys: &DiscreteSystem, map: &M) -> Result<Vec<f64>> {
    map.reconstruct(&flat_guess(sys)?)
}

/// Power method with the AE inner solver.
pub fn solve_ae_rom<M: LatentMap + ?Sized>(
    sys: &DiscreteSystem,
    map: &M,
    flux_guess: &[f64],
    lambda_guess: f64,
    settings: AeRomSettings,
) -> Result<CriticalitySolution> {
    let mut inner = AeInner::new(map, settings);
    power_method(sys, flux_guess, lambda_guess, &mut inner, settings.power)
}

/// [`solve_ae_rom`] from [`ae_initial_flux`] and its own eigenvalue estimate.
/// A unit guess would scale the first source by `k_eff` and push the flux off
/// the decoder manifold when `k_eff` is far from 1.
pub fn solve_ae_rom_default<M: LatentMap + ?Sized>(
    sys: &DiscreteSystem,
    map: &M,
    settings: AeRomSettings,
) -> Result<CriticalitySolution> {
    let guess = ae_initial_flux(sys, map)?;
    solve_ae_rom(sys, map, &guess, sys.rayleigh_lambda(&guess), settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{train, NadamHyper, NetworkSpec, TrainConfig};
    use crate::core_model::{Case, RodConfig};
    use crate::hfm::{assemble_case, solve_system, StencilMatrix};
    use crate::numerics::{gaussian_elimination, Truncation};
    use crate::pod_rom::{pod_inner_iteration, solve_pod_rom_default};

    struct Quadratic;

    impl LatentMap for Quadratic {
        fn n_dof(&self) -> usize {
            2
        }
        fn latent_dim(&self) -> usize {
            2
        }
        fn encode(&self, flux: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![flux[0].abs().sqrt(), flux[1]])
        }
        fn decode(&self, a: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![a[0] * a[0], a[1]])
        }
    }

    struct Identity(usize);

    impl LatentMap for Identity {
        fn n_dof(&self) -> usize {
            self.0
        }
        fn latent_dim(&self) -> usize {
            self.0
        }
        fn encode(&self, flux: &[f64]) -> Result<Vec<f64>> {
            Ok(flux.to_vec())
        }
        fn decode(&self, a: &[f64]) -> Result<Vec<f64>> {
            Ok(a.to_vec())
        }
    }

    fn slab_pod(p: usize) -> (Case, PodBasis) {
        let (case, snapshots) = slab_snapshots();
        let basis = PodBasis::from_snapshots(&snapshots, Truncation::Count(p)).unwrap();
        (case, basis)
    }

    fn slab_snapshots() -> (Case, DenseMatrix) {
        let case = Case::slab1d();
        let cols: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let z = vec![(i as f64 * 0.37) % 1.0, (i as f64 * 0.61 + 0.2) % 1.0];
                solve_system(&assemble_case(&case, &RodConfig::new(z).unwrap()).unwrap())
                    .unwrap()
                    .flux
            })
            .collect();
        (case, DenseMatrix::from_columns(&cols).unwrap())
    }

    #[test]
    fn quadratic_decoder_jacobian() {
        let lin = linearize_decoder(&Quadratic, &[1.0, 1.0], 1e-6).unwrap();
        let expect = [[2.0, 0.0], [0.0, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((lin.c[(i, j)] - expect[i][j]).abs() < 1e-5);
            }
        }
        assert_eq!(lin.anchor_flux, vec![1.0, 1.0]);
        assert!(linearize_decoder(&Quadratic, &[1.0, 1.0], 0.0).is_err());
        assert!(linearize_decoder(&Quadratic, &[1.0], 1e-6).is_err());
    }

    #[test]
    fn pod_map_jacobian_is_the_basis() {
        let (_, basis) = slab_pod(4);
        let map = ReductionMap::Pod(basis.clone());
        for (anchor, eps) in [(vec![0.1, -0.2, 0.05, 0.0], 1e-6), (vec![0.3, 0.0, -0.1, 0.2], 1e-4)] {
            let c = linearize_decoder(&map, &anchor, eps).unwrap().c;
            assert!(c.sub(&basis.r).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn identity_decoder_solves_the_full_system() {
        let sys = DiscreteSystem {
            a: StencilMatrix {
                nx: 2,
                ny: 1,
                diag: vec![3.0, 2.0],
                west: vec![0.0, -1.0],
                east: vec![-1.0, 0.0],
                south: vec![0.0; 2],
                north: vec![0.0; 2],
            },
            b: vec![1.0, 0.5],
        };
        let flux = [0.4, 1.2];
        let settings = AeRomSettings {
            regularization: Regularization::Absolute(1e-10),
            ..AeRomSettings::default()
        };
        let out = ae_inner_iterations(&sys, &Identity(2), &flux, 0.8, settings).unwrap();
        assert!(out.converged && out.iterations <= 2, "{out:?}");
        let s: Vec<f64> = sys.b.iter().zip(&flux).map(|(b, f)| 0.8 * b * f).collect();
        let direct = gaussian_elimination(&sys.a.to_dense(), &s).unwrap();
        for (a, b) in out.flux.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn pod_map_inner_matches_pod_inner() {
        let (case, basis) = slab_pod(6);
        let sys = assemble_case(&case, &RodConfig::new(vec![0.3, 0.8]).unwrap()).unwrap();
        let flux = basis.project_onto_span(&flat_guess(&sys).unwrap()).unwrap();
        let settings = AeRomSettings {
            regularization: Regularization::Absolute(1e-10),
            ..AeRomSettings::default()
        };
        let map = ReductionMap::Pod(basis.clone());
        let ae = ae_inner_iterations(&sys, &map, &flux, 0.9, settings).unwrap();
        let pod = pod_inner_iteration(&sys, &basis, &flux, 0.9).unwrap();
        let scale = norm_inf(&pod);
        for (a, b) in ae.flux.iter().zip(&pod) {
            assert!((a - b).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn pod_map_rom_matches_pod_rom() {
        let (case, basis) = slab_pod(6);
        let map = ReductionMap::Pod(basis.clone());
        let settings = AeRomSettings {
            regularization: Regularization::Absolute(1e-10),
            ..AeRomSettings::default()
        };
        for z in [[0.1, 0.9], [0.5, 0.5], [0.75, 0.2]] {
            let sys = assemble_case(&case, &RodConfig::new(z.to_vec()).unwrap()).unwrap();
            let ae = solve_ae_rom_default(&sys, &map, settings).unwrap();
            let pod = solve_pod_rom_default(&sys, &basis).unwrap();
            assert!(ae.converged);
            assert!((ae.k_eff - pod.k_eff).abs() < 1e-6);
            let h = &ae.history;
            assert!((h[h.len() - 1] - h[h.len() - 2]).abs() < 1e-8);
        }
    }

    #[test]
    fn svd_ae_jacobian_lies_in_basis_span() {
        let (_, snapshots) = slab_snapshots();
        let basis = PodBasis::from_snapshots(&snapshots, Truncation::Count(6)).unwrap();
        let coeffs = basis.r.tr_matmul(&snapshots).unwrap();
        let spec = NetworkSpec::new(vec![6, 4, 2, 4, 6], 2).unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 6,
            optimizer: NadamHyper::default(),
            seed: 1,
        };
        let ae = train(&spec, &coeffs, &cfg).unwrap();
        let map = compose_svd_ae(basis.clone(), ae.clone()).unwrap();
        assert_eq!(map.kind(), ReductionKind::SvdAe);
        let anchor = map.encode(&snapshots.column(3)).unwrap();
        let c = linearize_decoder(&map, &anchor, 1e-6).unwrap().c;
        let in_span = basis.r.matmul(&basis.r.tr_matmul(&c).unwrap()).unwrap();
        let off = c.sub(&in_span).unwrap().frobenius_norm();
        assert!(off <= 1e-10, "{off:e} {:e}", c.frobenius_norm());
        assert!(compose_svd_ae(basis, {
            let mut bad = ae;
            bad.spec.layer_sizes[0] = 5;
            bad
        })
        .is_err());
    }
}
