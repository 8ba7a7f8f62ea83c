use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core_model::{Case, RodConfig};
use crate::error::{Error, Result};
use crate::hfm::{solve_case, CriticalitySolution};
use crate::numerics::DenseMatrix;
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Used to build the reduction (training data).
    Seen,
    /// Held out (test data).
    Unseen,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Self::Seen => "seen",
            Self::Unseen => "unseen",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    /// Position in the draw sequence; also the RNG stream id.
    pub index: usize,
    pub split: Split,
    pub config: RodConfig,
    pub solution: CriticalitySolution,
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    pub case_name: String,
    pub seed: u64,
    /// Converged samples in draw order.
    pub samples: Vec<Sample>,
    /// Draw indices whose high-fidelity solve failed or did not converge.
    pub excluded: Vec<usize>,
}

impl SampleSet {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    /// Fluxes of one split as matrix columns.
    pub fn snapshot_matrix(&self, split: Split) -> Result<DenseMatrix> {
        let cols: Vec<Vec<f64>> = self.split(split).map(|s| s.solution.flux.clone()).collect();
        if cols.is_empty() {
            return Err(Error::Domain(format!("no {} samples", split.label())));
        }
        DenseMatrix::from_columns(&cols)
    }
}

/// Insertion fractions for draw `index`: uniform on `[0, 1)` per rod region,
/// from ChaCha8 stream `index` under `seed`.
pub fn draw_configs(n_rods: usize, count: usize, seed: u64) -> Vec<RodConfig> {
    (0..count)
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            RodConfig {
                z: (0..n_rods).map(|_| rng.random_range(0.0..1.0)).collect(),
            }
        })
        .collect()
}

/// `n_seen + n_unseen` high-fidelity solutions; the first `n_seen` draws are seen.
pub fn generate_split(case: &Case, n_seen: usize, n_unseen: usize, seed: u64) -> Result<SampleSet> {
    if n_seen == 0 || n_unseen == 0 {
        return Err(Error::Domain("both splits need at least one sample".into()));
    }
    let configs = draw_configs(case.n_rods(), n_seen + n_unseen, seed);
    let solved = parallel::map(&configs, |_, cfg| solve_case(case, cfg));

    let mut samples = Vec::with_capacity(configs.len());
    let mut excluded = Vec::new();
    for (index, (config, result)) in configs.into_iter().zip(solved).enumerate() {
        match result {
            Ok(solution) if solution.converged => samples.push(Sample {
                index,
                split: if index < n_seen { Split::Seen } else { Split::Unseen },
                config,
                solution,
            }),
            Ok(_) => {
                log::warn!("sample {index}: high-fidelity solve did not converge; excluded");
                excluded.push(index);
            }
            Err(e) => {
                log::warn!("sample {index}: high-fidelity solve failed ({e}); excluded");
                excluded.push(index);
            }
        }
    }
    if !excluded.is_empty() {
        log::warn!("{} of {} samples excluded", excluded.len(), n_seen + n_unseen);
    }
    Ok(SampleSet {
        case_name: case.name.clone(),
        seed,
        samples,
        excluded,
    })
}

/// `n` samples split evenly, the first half seen.
pub fn generate_samples(case: &Case, n: usize, seed: u64) -> Result<SampleSet> {
    if n < 2 {
        return Err(Error::Domain(format!("generate_samples: need n >= 2, got {n}")));
    }
    generate_split(case, n / 2, n - n / 2, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_deterministic_and_in_range() {
        let a = draw_configs(4, 50, 7);
        assert_eq!(a, draw_configs(4, 50, 7));
        assert_ne!(a, draw_configs(4, 50, 8));
        assert!(a.iter().flat_map(|c| &c.z).all(|z| (0.0..=1.0).contains(z)));
        // Streams are per index, so a longer draw extends a shorter one.
        assert_eq!(&draw_configs(4, 80, 7)[..50], &a[..]);
    }

    #[test]
    fn slab_split_sizes() {
        let set = generate_samples(&Case::slab1d(), 20, 3).unwrap();
        assert_eq!(set.count(Split::Seen), 10);
        assert_eq!(set.count(Split::Unseen), 10);
        assert!(set.excluded.is_empty());
        let again = generate_samples(&Case::slab1d(), 20, 3).unwrap();
        for (a, b) in set.samples.iter().zip(&again.samples) {
            assert_eq!(a.config, b.config);
            assert_eq!(a.solution.flux, b.solution.flux);
        }
        assert_eq!(set.snapshot_matrix(Split::Seen).unwrap().shape(), (100, 10));
        assert!(generate_samples(&Case::slab1d(), 1, 3).is_err());
    }
}
