use std::collections::{BTreeMap, BTreeSet};

use super::binning::{quantile_bin, BinConfig, Binning};
use crate::error::{Error, Result};
use crate::model::{DupBucket, ExperimentRecord, RegimeBinSummary};

/// Per-bucket binnings plus the buckets that could not be binned.
#[derive(Debug, Clone, Default)]
pub struct BucketBinnings {
    pub binnings: BTreeMap<DupBucket, Binning>,
    pub skipped: Vec<(DupBucket, String)>,
}

/// Bins each duplication bucket's sequences by their ID estimate. A
/// sequence audited by several models is counted once.
pub fn bin_by_bucket(records: &[ExperimentRecord], config: BinConfig) -> Result<BucketBinnings> {
    let mut per_bucket: BTreeMap<DupBucket, BTreeMap<&str, f64>> = BTreeMap::new();
    for r in records {
        let seqs = per_bucket.entry(r.dup_bucket).or_default();
        match seqs.get(r.seq_id.as_str()) {
            Some(&v) if v != r.id_estimate.value => {
                return Err(Error::InvalidParameter(format!(
                    "sequence `{}` carries two ID estimates ({v} and {})",
                    r.seq_id, r.id_estimate.value
                )));
            }
            Some(_) => {}
            None => {
                seqs.insert(&r.seq_id, r.id_estimate.value);
            }
        }
    }
    let mut out = BucketBinnings::default();
    for (bucket, seqs) in per_bucket {
        let values: Vec<(String, f64)> = seqs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        match quantile_bin(&values, config) {
            Ok(b) => {
                out.binnings.insert(bucket, b);
            }
            Err(Error::InsufficientData(msg)) => out.skipped.push((bucket, msg)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Memorization rate per (model, bucket, bin). Every model seen in the
/// records gets a row for every bin of every binned bucket; rows without
/// outcomes have `count = 0` and no rate. Records from buckets that were
/// not binned are ignored. Output is ordered by model, bucket, bin.
pub fn summarize(
    records: &[ExperimentRecord],
    binnings: &BTreeMap<DupBucket, Binning>,
) -> Result<Vec<RegimeBinSummary>> {
    let models: BTreeSet<&str> = records.iter().map(|r| r.outcome.model_label.as_str()).collect();
    // (model, bucket, bin) -> (memorized, total)
    let mut tally: BTreeMap<(&str, DupBucket, usize), (usize, usize)> = BTreeMap::new();
    for r in records {
        let Some(binning) = binnings.get(&r.dup_bucket) else {
            continue;
        };
        let bin = *binning.assignment.get(&r.seq_id).ok_or_else(|| {
            Error::InvalidParameter(format!("sequence `{}` has no bin assignment", r.seq_id))
        })?;
        let t = tally
            .entry((r.outcome.model_label.as_str(), r.dup_bucket, bin))
            .or_default();
        t.0 += usize::from(r.outcome.memorized);
        t.1 += 1;
    }

    let mut out = Vec::new();
    for model in &models {
        for (bucket, binning) in binnings {
            for skel in &binning.bins {
                let (hits, count) = tally
                    .get(&(*model, *bucket, skel.bin_index))
                    .copied()
                    .unwrap_or_default();
                let (mem_rate, stderr) = if count == 0 {
                    (None, None)
                } else {
                    let p = hits as f64 / count as f64;
                    (Some(p), Some((p * (1.0 - p) / count as f64).sqrt()))
                };
                out.push(RegimeBinSummary {
                    model_label: model.to_string(),
                    dup_bucket: *bucket,
                    bin_index: skel.bin_index,
                    id_min: skel.id_min,
                    id_max: skel.id_max,
                    id_mean: skel.id_mean,
                    mem_rate,
                    count,
                    stderr,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IdEstimate, MemorizationOutcome, Method};

    fn rec(seq: &str, id: f64, model: &str, memorized: bool) -> ExperimentRecord {
        ExperimentRecord {
            seq_id: seq.into(),
            dup_count: 1,
            dup_bucket: DupBucket { lo: 1, hi: 10 },
            id_estimate: IdEstimate {
                seq_id: seq.into(),
                method: Method::Twonn,
                value: id,
                n_used: 10,
                params: Default::default(),
            },
            outcome: MemorizationOutcome {
                seq_id: seq.into(),
                prefix_len: 1,
                suffix_len: 1,
                generated: vec![0],
                memorized,
                fractional: if memorized { 1.0 } else { 0.0 },
                model_label: model.into(),
            },
        }
    }

    #[test]
    fn quarter_rate() {
        let recs = vec![
            rec("a", 1.0, "m", true),
            rec("b", 2.0, "m", false),
            rec("c", 3.0, "m", false),
            rec("d", 4.0, "m", false),
        ];
        let b = bin_by_bucket(&recs, BinConfig { n_bins: 1 }).unwrap();
        let s = summarize(&recs, &b.binnings).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mem_rate, Some(0.25));
        assert_eq!(s[0].count, 4);
        assert!((s[0].stderr.unwrap() - (0.25f64 * 0.75 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(s[0].id_mean, 2.5);
    }

    #[test]
    fn empty_cell_has_null_rate() {
        // model "n" only saw sequence a, so bin 1 is empty for it
        let recs = vec![
            rec("a", 1.0, "m", true),
            rec("b", 2.0, "m", false),
            rec("a", 1.0, "n", true),
        ];
        let b = bin_by_bucket(&recs, BinConfig { n_bins: 2 }).unwrap();
        let s = summarize(&recs, &b.binnings).unwrap();
        let empty = s.iter().find(|r| r.model_label == "n" && r.bin_index == 1).unwrap();
        assert_eq!(empty.count, 0);
        assert_eq!(empty.mem_rate, None);
        assert_eq!(empty.stderr, None);
    }

    #[test]
    fn small_bucket_skipped() {
        let recs = vec![rec("a", 1.0, "m", true)];
        let b = bin_by_bucket(&recs, BinConfig::default()).unwrap();
        assert!(b.binnings.is_empty());
        assert_eq!(b.skipped.len(), 1);
    }

    #[test]
    fn conflicting_estimates_rejected() {
        let recs = vec![rec("a", 1.0, "m", true), rec("a", 2.0, "n", true)];
        assert!(bin_by_bucket(&recs, BinConfig { n_bins: 1 }).is_err());
    }
}
