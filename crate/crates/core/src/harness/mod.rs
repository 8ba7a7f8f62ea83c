//! Experiment orchestration: sampling, error measures, recipes and output files.

mod artifacts;
mod metrics;
mod recipe;
mod sampling;

pub use artifacts::{load_report, write_report, ArtifactWriter};
pub use metrics::{
    averaged_errors, e_keff, e_max_flux, e_max_reconstruction, quantiles, signed_max_error, MetricSummary,
    Quantiles,
};
pub use recipe::{
    run_recipe, showcase_r_values, BuiltMethod, ErrorReport, MethodReport, Recipe, RecipeOptions, RecipeOutcome, RomRecord,
    NetworkFamily, ShowcaseMethod, ShowcaseReport, SplitReport, RECIPES,
};
pub use sampling::{draw_configs, generate_samples, generate_split, Sample, SampleSet, Split};
