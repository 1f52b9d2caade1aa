//! Quantile binning, per-regime aggregation, trend statistics and the
//! synthetic generators used to validate the pipeline.

mod binning;
mod summary;
mod synth;
mod trend;

pub use binning::{quantile_bin, BinConfig, BinSkeleton, Binning, DEFAULT_BINS};
pub use summary::{bin_by_bucket, summarize, BucketBinnings};
pub use synth::{
    gen_hypercube, gen_planted_experiment, gen_sphere_surface, random_rotation, rigid_motion,
    Link, PlantedConfig, PlantedExperiment, PlantedModel,
};
pub use trend::{
    average_ranks, loglinear_fit, loglinear_fit_weighted, spearman, LogLinearFit, TrendStats,
};
