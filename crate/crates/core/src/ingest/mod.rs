//! Corpus and point-cloud input, duplicate counting, cloud cleaning and
//! duplication-stratified sampling.

mod corpus;
mod dedup;
mod pointcloud;
mod stratify;

use serde::{Deserialize, Serialize};

pub use corpus::{load_corpus, read_corpus};
pub use dedup::{count_exact_duplicates, resolve_dup_counts};
pub use pointcloud::{
    decode_binary, decode_text, encode_binary, read_pointclouds, write_pointclouds, CloudFormat,
};
pub use stratify::{
    fisher_yates, stratify, BucketSample, DupBuckets, SampleSpec, SplitMix64, StratifiedSample,
    DEFAULT_EDGES, DEFAULT_PER_BUCKET,
};

use crate::error::Result;
use crate::geometry::dedupe_counted;
use crate::model::PointCloud;

/// Rows removed by [`clean_cloud`], per step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub special_removed: usize,
    pub duplicates_removed: usize,
}

/// Drops tokenization-artifact rows (those flagged in the special mask),
/// then exact duplicate rows.
pub fn clean_cloud(cloud: &PointCloud) -> Result<(PointCloud, CleanReport)> {
    let (out, special_removed, duplicates_removed) = dedupe_counted(cloud)?;
    Ok((
        out,
        CleanReport {
            special_removed,
            duplicates_removed,
        },
    ))
}
