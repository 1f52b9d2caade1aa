//! Duplication-stratified subsampling.
//!
//! The selection is reproducible from `(records, edges, per_bucket_n, seed)`
//! alone, in any language:
//!
//! 1. Members of bucket `b` (0-based) are sorted by id (byte order).
//! 2. A SplitMix64 generator is seeded with `seed ^ (b * 0x9E3779B97F4A7C15)`
//!    (wrapping multiply).
//! 3. Fisher–Yates: for `i` from `len-1` down to `1`, draw `x = next()` and
//!    swap positions `i` and `j = (x * (i+1)) >> 64` (128-bit product).
//! 4. The first `min(per_bucket_n, len)` records are kept and re-sorted by id.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DupBucket, SequenceRecord};

pub const DEFAULT_EDGES: [u64; 4] = [1, 10, 100, 1000];
pub const DEFAULT_PER_BUCKET: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct DupBuckets {
    edges: Vec<u64>,
}

impl DupBuckets {
    pub fn new(edges: Vec<u64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidParameter("need at least two bucket edges".into()));
        }
        if edges[0] < 1 {
            return Err(Error::InvalidParameter("first bucket edge must be >= 1".into()));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "bucket edges {edges:?} are not strictly ascending"
            )));
        }
        Ok(DupBuckets { edges })
    }

    pub fn edges(&self) -> &[u64] {
        &self.edges
    }

    pub fn buckets(&self) -> impl ExactSizeIterator<Item = DupBucket> + '_ {
        self.edges.windows(2).map(|w| DupBucket { lo: w[0], hi: w[1] })
    }

    pub fn bucket_of(&self, dup_count: u64) -> Option<DupBucket> {
        self.buckets().find(|b| b.contains(dup_count))
    }

    fn index_of(&self, dup_count: u64) -> Option<usize> {
        self.buckets().position(|b| b.contains(dup_count))
    }
}

impl Default for DupBuckets {
    fn default() -> Self {
        DupBuckets {
            edges: DEFAULT_EDGES.to_vec(),
        }
    }
}

impl TryFrom<Vec<u64>> for DupBuckets {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        DupBuckets::new(v)
    }
}

impl From<DupBuckets> for Vec<u64> {
    fn from(b: DupBuckets) -> Self {
        b.edges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub per_bucket_n: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(per_bucket_n: usize, seed: u64) -> Result<Self> {
        if per_bucket_n == 0 {
            return Err(Error::InvalidParameter("per_bucket_n must be >= 1".into()));
        }
        Ok(SampleSpec { per_bucket_n, seed })
    }
}

/// SplitMix64 (Steele, Lea & Flood).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `0..bound` by widening multiply.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

pub fn fisher_yates<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSample {
    pub bucket: DupBucket,
    /// Bucket members before sampling.
    pub population: usize,
    /// True when the bucket held fewer than `per_bucket_n` records.
    pub shortfall: bool,
    pub records: Vec<SequenceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedSample {
    pub buckets: Vec<BucketSample>,
    /// Records whose dup_count fell outside every bucket.
    pub excluded: usize,
}

impl StratifiedSample {
    pub fn records(&self) -> impl Iterator<Item = (&DupBucket, &SequenceRecord)> + '_ {
        self.buckets
            .iter()
            .flat_map(|b| b.records.iter().map(move |r| (&b.bucket, r)))
    }
}

fn stream_seed(seed: u64, bucket_index: usize) -> u64 {
    seed ^ (bucket_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn stratify(
    records: &[SequenceRecord],
    buckets: &DupBuckets,
    spec: SampleSpec,
) -> Result<StratifiedSample> {
    let mut members: Vec<Vec<&SequenceRecord>> = vec![Vec::new(); buckets.buckets().len()];
    let mut excluded = 0;
    for r in records {
        let dup = r.dup_count.ok_or_else(|| Error::MissingDupCount { id: r.id.clone() })?;
        match buckets.index_of(dup) {
            Some(b) => members[b].push(r),
            None => excluded += 1,
        }
    }

    let out = buckets
        .buckets()
        .zip(members)
        .enumerate()
        .map(|(b, (bucket, mut group))| {
            group.sort_by(|x, y| x.id.cmp(&y.id));
            let population = group.len();
            let mut rng = SplitMix64::new(stream_seed(spec.seed, b));
            fisher_yates(&mut group, &mut rng);
            group.truncate(spec.per_bucket_n);
            group.sort_by(|x, y| x.id.cmp(&y.id));
            BucketSample {
                bucket,
                population,
                shortfall: population < spec.per_bucket_n,
                records: group.into_iter().cloned().collect(),
            }
        })
        .collect();

    Ok(StratifiedSample {
        buckets: out,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(n: usize, dup: u64, prefix: &str) -> Vec<SequenceRecord> {
        (0..n)
            .map(|i| SequenceRecord::new(format!("{prefix}{i:05}"), vec![i as u32], dup))
            .collect()
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 0 from the reference C implementation
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn exact_quota_and_determinism() {
        let recs = corpus(5000, 1, "s");
        let spec = SampleSpec::new(1000, 42).unwrap();
        let a = stratify(&recs, &DupBuckets::default(), spec).unwrap();
        let b = stratify(&recs, &DupBuckets::default(), spec).unwrap();
        assert_eq!(a.buckets[0].records.len(), 1000);
        assert!(!a.buckets[0].shortfall);
        assert_eq!(a, b);
        let c = stratify(&recs, &DupBuckets::default(), SampleSpec::new(1000, 43).unwrap()).unwrap();
        assert_ne!(a.buckets[0].records, c.buckets[0].records);
    }

    #[test]
    fn shortfall_flagged() {
        let recs = corpus(7, 50, "m");
        let s = stratify(&recs, &DupBuckets::default(), SampleSpec::new(1000, 1).unwrap()).unwrap();
        assert_eq!(s.buckets[1].records.len(), 7);
        assert!(s.buckets[1].shortfall);
    }

    #[test]
    fn upper_edge_excluded() {
        let mut recs = corpus(3, 999, "a");
        recs.extend(corpus(2, 1000, "b"));
        let s = stratify(&recs, &DupBuckets::default(), SampleSpec::new(10, 1).unwrap()).unwrap();
        assert_eq!(s.excluded, 2);
        assert_eq!(s.buckets[2].records.len(), 3);
    }

    #[test]
    fn missing_count_is_an_error() {
        let mut recs = corpus(1, 1, "a");
        recs[0].dup_count = None;
        assert!(stratify(&recs, &DupBuckets::default(), SampleSpec::new(1, 0).unwrap()).is_err());
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(DupBuckets::new(vec![0, 10]).is_err());
        assert!(DupBuckets::new(vec![1, 10, 10]).is_err());
        assert!(DupBuckets::new(vec![5]).is_err());
    }
}
