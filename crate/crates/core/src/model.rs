//! Records shared across the pipeline: token sequences, point clouds,
//! dimension estimates, memorization outcomes and binned summaries.
//!
//! Every type here is plain data. Once built (and validated where a
//! constructor exists) values are never mutated in place, so they can be
//! shared freely across worker threads.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Sequence length used throughout the experiments.
pub const DEFAULT_SEQUENCE_LEN: usize = 150;

pub type TokenId = u32;

/// One fixed-length token sequence from the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    pub tokens: Vec<TokenId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Exact full-sequence duplicate count. `None` until supplied by the
    /// corpus or computed by [`crate::ingest::resolve_dup_counts`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dup_count: Option<u64>,
    /// True when `dup_count` was computed here rather than supplied.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dup_computed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_label: Option<String>,
}

impl SequenceRecord {
    pub fn new(id: impl Into<String>, tokens: Vec<TokenId>, dup_count: u64) -> Self {
        SequenceRecord {
            id: id.into(),
            tokens,
            text: None,
            dup_count: Some(dup_count),
            dup_computed: false,
            source: None,
            model_label: None,
        }
    }
}

/// Checks the per-record invariants: exact length and, when present, a
/// positive duplicate count. Corpus-level id uniqueness is checked by
/// [`check_unique_ids`].
pub fn validate_record(record: SequenceRecord, expected_len: usize) -> Result<SequenceRecord> {
    if record.tokens.len() != expected_len {
        return Err(Error::LengthMismatch {
            id: record.id,
            expected: expected_len,
            actual: record.tokens.len(),
        });
    }
    if record.dup_count == Some(0) {
        return Err(Error::InvalidDupCount { id: record.id });
    }
    Ok(record)
}

pub fn check_unique_ids<'a>(records: impl IntoIterator<Item = &'a SequenceRecord>) -> Result<()> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    Ok(())
}

/// 128-bit content hash of a token sequence (truncated SHA-256 over the
/// little-endian token bytes). Used for duplicate grouping and as the key
/// of the mock server's prefix table.
pub fn token_hash(tokens: &[TokenId]) -> u128 {
    let mut h = Sha256::new();
    h.update((tokens.len() as u64).to_le_bytes());
    for t in tokens {
        h.update(t.to_le_bytes());
    }
    let digest = h.finalize();
    let mut first = [0u8; 16];
    first.copy_from_slice(&digest[..16]);
    u128::from_be_bytes(first)
}

pub fn token_hash_hex(tokens: &[TokenId]) -> String {
    format!("{:032x}", token_hash(tokens))
}

/// Per-sequence cloud of ambient-space token vectors, stored row-major.
///
/// The text representation (`seq_id`, `special`, `vectors`) is the serde
/// form, so a line of a point-cloud JSONL file deserializes directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TextCloud", into = "TextCloud")]
pub struct PointCloud {
    seq_id: String,
    dim: usize,
    coords: Vec<f64>,
    special_mask: Vec<bool>,
}

impl PointCloud {
    pub fn new(
        seq_id: impl Into<String>,
        dim: usize,
        coords: Vec<f64>,
        special_mask: Vec<bool>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("point cloud dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not fill rows of width {dim}",
                coords.len()
            )));
        }
        let n = coords.len() / dim;
        if special_mask.len() != n {
            return Err(Error::InvalidParameter(format!(
                "special mask has {} entries for {n} rows",
                special_mask.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(PointCloud {
            seq_id: seq_id.into(),
            dim,
            coords,
            special_mask,
        })
    }

    /// Cloud with no special rows.
    pub fn from_rows(seq_id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        let coords = rows.iter().flatten().copied().collect();
        PointCloud::new(seq_id, dim, coords, vec![false; rows.len()])
    }

    pub fn seq_id(&self) -> &str {
        &self.seq_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.special_mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.special_mask.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn special_mask(&self) -> &[bool] {
        &self.special_mask
    }

    /// Applies `f` to every row, producing a cloud with the same mask.
    pub fn map_rows(&self, dim: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut coords = Vec::with_capacity(self.len() * dim);
        for r in self.rows() {
            let out = f(r);
            if out.len() != dim {
                return Err(Error::InvalidParameter("mapped row has wrong width".into()));
            }
            coords.extend(out);
        }
        PointCloud::new(self.seq_id.clone(), dim, coords, self.special_mask.clone())
    }

    /// Keeps the rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        let mut mask = Vec::with_capacity(indices.len());
        for &i in indices {
            coords.extend_from_slice(self.row(i));
            mask.push(self.special_mask[i]);
        }
        PointCloud {
            seq_id: self.seq_id.clone(),
            dim: self.dim,
            coords,
            special_mask: mask,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TextCloud {
    seq_id: String,
    special: Vec<u8>,
    vectors: Vec<Vec<f64>>,
}

impl TryFrom<TextCloud> for PointCloud {
    type Error = Error;

    fn try_from(t: TextCloud) -> Result<Self> {
        let dim = t.vectors.first().map_or(0, Vec::len);
        if let Some(bad) = t.vectors.iter().position(|v| v.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "row {bad} has {} values, expected {dim}",
                t.vectors[bad].len()
            )));
        }
        let mask = t
            .special
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidParameter(format!("special flag {other} is not 0/1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let coords = t.vectors.into_iter().flatten().collect();
        PointCloud::new(t.seq_id, dim.max(1), coords, mask)
    }
}

impl From<PointCloud> for TextCloud {
    fn from(c: PointCloud) -> Self {
        TextCloud {
            special: c.special_mask.iter().map(|&b| b as u8).collect(),
            vectors: c.rows().map(<[f64]>::to_vec).collect(),
            seq_id: c.seq_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Twonn,
    MleLb,
    Pca,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Twonn => "twonn",
            Method::MleLb => "mle_lb",
            Method::Pca => "pca",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoNNFit {
    #[default]
    Mle,
    LeastSquares,
}

/// Estimator parameters echoed into every estimate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discard_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<TwoNNFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdEstimate {
    pub seq_id: String,
    pub method: Method,
    pub value: f64,
    pub n_used: usize,
    #[serde(default)]
    pub params: EstimateParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorizationOutcome {
    pub seq_id: String,
    pub prefix_len: usize,
    pub suffix_len: usize,
    pub generated: Vec<TokenId>,
    pub memorized: bool,
    pub fractional: f64,
    pub model_label: String,
}

/// Half-open duplication range `[lo, hi)`; serialized as `"[lo,hi)"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DupBucket {
    pub lo: u64,
    pub hi: u64,
}

impl DupBucket {
    pub fn contains(&self, dup_count: u64) -> bool {
        self.lo <= dup_count && dup_count < self.hi
    }
}

impl fmt::Display for DupBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.lo, self.hi)
    }
}

impl FromStr for DupBucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad bucket `{s}`, expected `[lo,hi)`"));
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        if lo >= hi {
            return Err(bad());
        }
        Ok(DupBucket { lo, hi })
    }
}

impl Serialize for DupBucket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DupBucket {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One (sequence, model) observation joining the ID estimate with the
/// memorization outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seq_id: String,
    pub dup_count: u64,
    pub dup_bucket: DupBucket,
    pub id_estimate: IdEstimate,
    pub outcome: MemorizationOutcome,
}

impl ExperimentRecord {
    pub fn new(
        dup_count: u64,
        dup_bucket: DupBucket,
        id_estimate: IdEstimate,
        outcome: MemorizationOutcome,
    ) -> Result<Self> {
        if !dup_bucket.contains(dup_count) {
            return Err(Error::InvalidParameter(format!(
                "dup_count {dup_count} outside bucket {dup_bucket}"
            )));
        }
        if id_estimate.seq_id != outcome.seq_id {
            return Err(Error::InvalidParameter(format!(
                "estimate for `{}` joined with outcome for `{}`",
                id_estimate.seq_id, outcome.seq_id
            )));
        }
        Ok(ExperimentRecord {
            seq_id: outcome.seq_id.clone(),
            dup_count,
            dup_bucket,
            id_estimate,
            outcome,
        })
    }
}

/// Aggregate of one quantile bin within a (model, duplication regime) group.
/// `mem_rate` and `stderr` are `None` when the bin holds no outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeBinSummary {
    pub model_label: String,
    pub dup_bucket: DupBucket,
    pub bin_index: usize,
    pub id_min: f64,
    pub id_max: f64,
    pub id_mean: f64,
    pub mem_rate: Option<f64>,
    pub count: usize,
    pub stderr: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_exact_length() {
        let r = SequenceRecord::new("a", vec![7; 150], 1);
        assert_eq!(validate_record(r.clone(), 150).unwrap(), r);
    }

    #[test]
    fn validate_rejects_short_record() {
        let r = SequenceRecord::new("a", vec![7; 149], 1);
        assert!(matches!(
            validate_record(r, 150),
            Err(Error::LengthMismatch { actual: 149, .. })
        ));
    }

    #[test]
    fn validate_rejects_zero_dup_count() {
        let r = SequenceRecord::new("a", vec![7; 150], 0);
        assert!(matches!(validate_record(r, 150), Err(Error::InvalidDupCount { .. })));
    }

    #[test]
    fn duplicate_ids_detected() {
        let a = SequenceRecord::new("a", vec![1], 1);
        let b = SequenceRecord::new("a", vec![2], 1);
        assert!(matches!(check_unique_ids([&a, &b]), Err(Error::DuplicateId(id)) if id == "a"));
    }

    #[test]
    fn bucket_string_form() {
        let b: DupBucket = "[10,100)".parse().unwrap();
        assert_eq!(b, DupBucket { lo: 10, hi: 100 });
        assert_eq!(serde_json::to_string(&b).unwrap(), "\"[10,100)\"");
        assert!("[10,10)".parse::<DupBucket>().is_err());
    }

    #[test]
    fn cloud_rejects_nan_and_bad_mask() {
        assert!(matches!(
            PointCloud::new("c", 2, vec![0.0, f64::NAN], vec![false]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(PointCloud::new("c", 2, vec![0.0, 1.0], vec![]).is_err());
    }

    #[test]
    fn token_hash_separates_lengths() {
        assert_ne!(token_hash(&[]), token_hash(&[0]));
        assert_eq!(token_hash(&[1, 2]), token_hash(&[1, 2]));
    }
}
