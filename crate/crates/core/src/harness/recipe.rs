use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autoencoder::{train, Autoencoder, NetworkSpec, TrainConfig};
use crate::core_model::{Case, RodConfig};
use crate::error::{Error, Result};
use crate::hfm::{assemble_case, solve_case, CriticalitySolution};
use crate::numerics::{method_of_snapshots, DenseMatrix, SvdResult, Truncation};
use crate::parallel;
use crate::pod_rom::{solve_pod_rom_default, PodBasis};
use crate::rom_nonlinear::{compose_svd_ae, solve_ae_rom_default, AeRomSettings, LatentMap, ReductionKind, ReductionMap};

use super::artifacts::ArtifactWriter;
use super::metrics::{averaged_errors, e_keff, e_max_flux, e_max_reconstruction, MetricSummary};
use super::sampling::{generate_split, SampleSet, Split};

pub const RECIPES: [&str; 3] = ["slab1d_p10", "slab1d_p2", "core2d_p4"];

/// Full-scale grid cells per side of the 2D core.
const CORE2D_FULL_GRID: usize = 90;
/// POD modes kept before the autoencoder in the SVD-autoencoder.
const SVD_AE_MODES: usize = 100;

/// Showcase mixing coefficients `(seen, unseen)` per case family.
pub fn showcase_r_values(case_name: &str) -> Option<(Vec<f64>, Vec<f64>)> {
    match case_name {
        "slab1d" => Some((vec![0.957, 0.115], vec![0.458, 0.932])),
        "core2d" => Some((vec![0.9782, 0.9891, 0.7006, 0.8316], vec![0.9452, 0.8647, 0.9996, 0.9776])),
        _ => None,
    }
}

/// Overrides applied on top of a recipe's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecipeOptions {
    pub seed: u64,
    /// Values below 1 select the reduced CI profile of the 2D recipe.
    pub scale: Option<f64>,
    pub n_seen: Option<usize>,
    pub n_unseen: Option<usize>,
    pub epochs: Option<usize>,
    pub latent_dim: Option<usize>,
    pub methods: Option<Vec<ReductionKind>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkFamily {
    Slab1d,
    Core2d,
}

impl NetworkFamily {
    fn spec(self, input: usize, latent: usize) -> Result<NetworkSpec> {
        match self {
            Self::Slab1d => NetworkSpec::slab1d(input, latent),
            Self::Core2d => NetworkSpec::core2d(input, latent),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Recipe {
    pub name: String,
    #[serde(skip)]
    pub case: Case,
    pub case_name: String,
    pub grid: [usize; 2],
    pub scale: f64,
    pub seed: u64,
    pub latent_dim: usize,
    pub methods: Vec<ReductionKind>,
    pub n_seen: usize,
    pub n_unseen: usize,
    pub network: NetworkFamily,
    /// Training settings; the seed is offset per method (`+1` AE, `+2` SVD-AE).
    pub training: TrainConfig,
    pub svd_ae_modes: usize,
    pub showcase_seen_r: Vec<f64>,
    pub showcase_unseen_r: Vec<f64>,
}

impl Recipe {
    pub fn new(name: &str, opts: &RecipeOptions) -> Result<Self> {
        let scale = opts.scale.unwrap_or(1.0);
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::Config(format!("scale {scale} must lie in (0, 1]")));
        }
        let reduced = scale < 1.0;
        let (case, latent, methods, n_each, network, mut training) = match name {
            "slab1d_p10" | "slab1d_p2" => {
                let p = if name == "slab1d_p10" { 10 } else { 2 };
                (
                    Case::slab1d(),
                    p,
                    vec![ReductionKind::Pod, ReductionKind::Ae],
                    100,
                    NetworkFamily::Slab1d,
                    TrainConfig::slab1d(opts.seed),
                )
            }
            "core2d_p4" => {
                let n = if reduced {
                    ((CORE2D_FULL_GRID as f64 * scale).round() as usize).max(10)
                } else {
                    CORE2D_FULL_GRID
                };
                let mut training = TrainConfig::core2d(opts.seed);
                if reduced {
                    training.epochs = 5000;
                }
                (
                    Case::core2d(n),
                    4,
                    vec![ReductionKind::Pod, ReductionKind::Ae, ReductionKind::SvdAe],
                    if reduced { 100 } else { 400 },
                    NetworkFamily::Core2d,
                    training,
                )
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown recipe '{other}' (expected one of {RECIPES:?})"
                )))
            }
        };
        if let Some(e) = opts.epochs {
            training.epochs = e;
        }
        let n_seen = opts.n_seen.unwrap_or(n_each);
        let n_unseen = opts.n_unseen.unwrap_or(n_each);
        training.batch_size = training.batch_size.min(n_seen);
        let base_name = if case.geometry.dims == 1 { "slab1d" } else { "core2d" };
        let (seen_r, unseen_r) = showcase_r_values(base_name).expect("built-in case has showcase values");
        Ok(Self {
            name: name.to_string(),
            case_name: case.name.clone(),
            grid: [case.geometry.nx, case.geometry.ny],
            case,
            scale,
            seed: opts.seed,
            latent_dim: opts.latent_dim.unwrap_or(latent),
            methods: opts.methods.clone().unwrap_or(methods),
            n_seen,
            n_unseen,
            network,
            training,
            svd_ae_modes: SVD_AE_MODES,
            showcase_seen_r: seen_r,
            showcase_unseen_r: unseen_r,
        })
    }

    fn training_for(&self, kind: ReductionKind) -> TrainConfig {
        let offset = match kind {
            ReductionKind::Pod => 0,
            ReductionKind::Ae => 1,
            ReductionKind::SvdAe => 2,
        };
        TrainConfig {
            seed: self.seed.wrapping_add(offset),
            ..self.training.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    /// Representation error `e_max` of `decode ∘ encode` on the HFM flux.
    pub compression: MetricSummary,
    pub flux: MetricSummary,
    pub k_eff: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: ReductionKind,
    pub latent_dim: usize,
    /// Fraction of `Σσ²` captured by the POD modes the method uses.
    pub capture_fraction: Option<f64>,
    pub final_training_loss: Option<f64>,
    pub seen: SplitReport,
    pub unseen: SplitReport,
    /// Samples whose ROM solve returned an error (left out of the averages).
    pub rom_failures: usize,
    /// ROM solves that hit the outer-iteration cap.
    pub rom_unconverged: usize,
    /// Outer iterations, over all samples, whose inner loop hit its cap.
    pub inner_cap_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShowcaseMethod {
    pub method: ReductionKind,
    pub k_eff: f64,
    pub e_keff: f64,
    pub e_max_flux: f64,
    pub outer_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShowcaseReport {
    pub label: Split,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub k_hfm: f64,
    pub methods: Vec<ShowcaseMethod>,
}

/// Top-level summary written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub recipe: serde_json::Value,
    pub n_dof: usize,
    pub excluded_samples: Vec<usize>,
    pub pod_rank: usize,
    pub methods: Vec<MethodReport>,
    pub showcase: Vec<ShowcaseReport>,
}

impl ErrorReport {
    pub fn method(&self, kind: ReductionKind) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == kind)
    }
}

/// Per-sample ROM outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RomRecord {
    pub index: usize,
    pub split: Split,
    pub e_compression: f64,
    pub e_flux: Option<f64>,
    pub e_keff: Option<f64>,
    pub k_hfm: f64,
    pub k_rom: Option<f64>,
    pub converged: bool,
    pub outer_iters: usize,
    pub inner_iterations: Vec<usize>,
    pub inner_failures: usize,
    pub k_history: Vec<f64>,
    pub error: Option<String>,
}

/// A reduction built during a recipe run.
pub struct BuiltMethod {
    pub kind: ReductionKind,
    pub map: ReductionMap,
    pub capture_fraction: Option<f64>,
}

impl BuiltMethod {
    fn autoencoder(&self) -> Option<&Autoencoder> {
        match &self.map {
            ReductionMap::Pod(_) => None,
            ReductionMap::Ae(ae) | ReductionMap::SvdAe { ae, .. } => Some(ae),
        }
    }

    pub fn solve(&self, sys: &crate::hfm::DiscreteSystem) -> Result<CriticalitySolution> {
        match &self.map {
            ReductionMap::Pod(basis) => solve_pod_rom_default(sys, basis),
            map => solve_ae_rom_default(sys, map, AeRomSettings::default()),
        }
    }
}

pub struct RecipeOutcome {
    pub recipe: Recipe,
    pub report: ErrorReport,
    pub samples: SampleSet,
    pub svd: SvdResult,
    pub methods: Vec<BuiltMethod>,
    pub records: Vec<Vec<RomRecord>>,
}

fn build_method(recipe: &Recipe, kind: ReductionKind, snapshots: &DenseMatrix, svd: &SvdResult) -> Result<BuiltMethod> {
    let p = recipe.latent_dim;
    match kind {
        ReductionKind::Pod => {
            let basis = PodBasis::from_svd(svd, Truncation::Count(p))?;
            Ok(BuiltMethod {
                kind,
                capture_fraction: Some(basis.capture_fraction),
                map: ReductionMap::Pod(basis),
            })
        }
        ReductionKind::Ae => {
            let spec = recipe.network.spec(snapshots.rows(), p)?;
            let ae = train(&spec, snapshots, &recipe.training_for(kind))?;
            Ok(BuiltMethod {
                kind,
                capture_fraction: None,
                map: ReductionMap::Ae(ae),
            })
        }
        ReductionKind::SvdAe => {
            let modes = recipe.svd_ae_modes.min(svd.rank());
            let basis = PodBasis::from_svd(svd, Truncation::Count(modes))?;
            let coefficients = basis.r.tr_matmul(snapshots)?;
            let spec = recipe.network.spec(modes, p)?;
            let ae = train(&spec, &coefficients, &recipe.training_for(kind))?;
            Ok(BuiltMethod {
                kind,
                capture_fraction: Some(basis.capture_fraction),
                map: compose_svd_ae(basis, ae)?,
            })
        }
    }
}

fn evaluate(case: &Case, samples: &SampleSet, method: &BuiltMethod) -> Result<Vec<RomRecord>> {
    let results = parallel::map(&samples.samples, |_, s| -> Result<RomRecord> {
        let hfm = &s.solution;
        let e_compression = e_max_reconstruction(&hfm.flux, &method.map)?;
        let sys = assemble_case(case, &s.config)?;
        let mut record = RomRecord {
            index: s.index,
            split: s.split,
            e_compression,
            e_flux: None,
            e_keff: None,
            k_hfm: hfm.k_eff,
            k_rom: None,
            converged: false,
            outer_iters: 0,
            inner_iterations: Vec::new(),
            inner_failures: 0,
            k_history: Vec::new(),
            error: None,
        };
        match method.solve(&sys) {
            Ok(rom) => {
                record.e_flux = Some(e_max_flux(&hfm.flux, &rom.flux)?);
                record.e_keff = Some(e_keff(hfm.k_eff, rom.k_eff));
                record.k_rom = Some(rom.k_eff);
                record.converged = rom.converged;
                record.outer_iters = rom.outer_iters;
                record.inner_failures = rom.inner_failures;
                record.inner_iterations = rom.inner_iterations;
                record.k_history = rom.history;
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        Ok(record)
    });
    results.into_iter().collect()
}

fn split_report(records: &[RomRecord], split: Split) -> SplitReport {
    let of = |f: &dyn Fn(&RomRecord) -> Option<f64>| -> Vec<f64> {
        records.iter().filter(|r| r.split == split).filter_map(f).collect()
    };
    SplitReport {
        compression: averaged_errors(&of(&|r| Some(r.e_compression))),
        flux: averaged_errors(&of(&|r| r.e_flux)),
        k_eff: averaged_errors(&of(&|r| r.e_keff)),
    }
}

fn method_report(method: &BuiltMethod, records: &[RomRecord]) -> MethodReport {
    MethodReport {
        method: method.kind,
        latent_dim: method.map.latent_dim(),
        capture_fraction: method.capture_fraction,
        final_training_loss: method.autoencoder().and_then(|ae| ae.loss_history.last().copied()),
        seen: split_report(records, Split::Seen),
        unseen: split_report(records, Split::Unseen),
        rom_failures: records.iter().filter(|r| r.error.is_some()).count(),
        rom_unconverged: records.iter().filter(|r| r.error.is_none() && !r.converged).count(),
        inner_cap_hits: records.iter().map(|r| r.inner_failures).sum(),
    }
}

struct ShowcaseRun {
    report: ShowcaseReport,
    hfm: CriticalitySolution,
    roms: Vec<(ReductionKind, CriticalitySolution)>,
}

fn run_showcase(recipe: &Recipe, methods: &[BuiltMethod], label: Split, r: &[f64]) -> Result<ShowcaseRun> {
    let config: RodConfig = recipe.case.insertion_from_mixing(r)?;
    let hfm = solve_case(&recipe.case, &config)?;
    let sys = assemble_case(&recipe.case, &config)?;
    let mut roms = Vec::new();
    let mut rows = Vec::new();
    for m in methods {
        let rom = m.solve(&sys)?;
        rows.push(ShowcaseMethod {
            method: m.kind,
            k_eff: rom.k_eff,
            e_keff: e_keff(hfm.k_eff, rom.k_eff),
            e_max_flux: e_max_flux(&hfm.flux, &rom.flux)?,
            outer_iters: rom.outer_iters,
        });
        roms.push((m.kind, rom));
    }
    Ok(ShowcaseRun {
        report: ShowcaseReport {
            label,
            r: r.to_vec(),
            z: config.z,
            k_hfm: hfm.k_eff,
            methods: rows,
        },
        hfm,
        roms,
    })
}

/// Runs a recipe end to end. With `out`, every artifact is written there;
/// if a stage fails, the files written so far stay and `failure.json` names
/// the stage.
pub fn run_recipe(recipe: Recipe, out: Option<&Path>) -> Result<RecipeOutcome> {
    let writer = out.map(ArtifactWriter::new).transpose()?;
    let mut stage = "sampling";
    let result = run_stages(recipe, writer.as_ref(), &mut stage);
    if let (Err(e), Some(w)) = (&result, &writer) {
        w.write_failure(stage, e)?;
    }
    result
}

fn run_stages(recipe: Recipe, writer: Option<&ArtifactWriter>, stage: &mut &'static str) -> Result<RecipeOutcome> {
    log::info!(
        "recipe {}: {} seen + {} unseen samples on {}x{}",
        recipe.name,
        recipe.n_seen,
        recipe.n_unseen,
        recipe.grid[0],
        recipe.grid[1]
    );
    let samples = generate_split(&recipe.case, recipe.n_seen, recipe.n_unseen, recipe.seed)?;
    if let Some(w) = writer {
        w.write_samples(&samples)?;
    }

    *stage = "reduction";
    let snapshots = samples.snapshot_matrix(Split::Seen)?;
    let svd = method_of_snapshots(&snapshots)?;
    if let Some(w) = writer {
        w.write_singular_values(&svd)?;
    }
    let built: Vec<BuiltMethod> = parallel::map(&recipe.methods, |_, &kind| {
        log::info!("building {} reduction", kind.label());
        build_method(&recipe, kind, &snapshots, &svd)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    if let Some(w) = writer {
        for m in &built {
            w.write_method(m, &snapshots)?;
        }
    }

    *stage = "evaluation";
    let mut records = Vec::with_capacity(built.len());
    for m in &built {
        log::info!("evaluating {} ROM on {} samples", m.kind.label(), samples.samples.len());
        let rec = evaluate(&recipe.case, &samples, m)?;
        if let Some(w) = writer {
            w.write_records(m.kind, &rec)?;
        }
        records.push(rec);
    }

    *stage = "showcase";
    let mut showcase = Vec::new();
    for (label, r) in [(Split::Seen, &recipe.showcase_seen_r), (Split::Unseen, &recipe.showcase_unseen_r)] {
        let run = run_showcase(&recipe, &built, label, r)?;
        if let Some(w) = writer {
            w.write_showcase(&recipe.case, label, &run.hfm, &run.roms)?;
        }
        showcase.push(run.report);
    }

    *stage = "report";
    let report = ErrorReport {
        recipe: serde_json::to_value(&recipe)?,
        n_dof: recipe.case.n_dof(),
        excluded_samples: samples.excluded.clone(),
        pod_rank: svd.rank(),
        methods: built
            .iter()
            .zip(&records)
            .map(|(m, r)| method_report(m, r))
            .collect(),
        showcase,
    };
    if let Some(w) = writer {
        w.write_report(&report)?;
    }
    Ok(RecipeOutcome {
        recipe,
        report,
        samples,
        svd,
        methods: built,
        records,
    })
}
