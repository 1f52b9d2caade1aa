use std::collections::BTreeMap;
use std::path::Path;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use super::client::{fetch_continuation, InferenceEndpoint};
use super::{check_verbatim, split_prefix_suffix, SplitSpec};
use crate::error::{Error, Result};
use crate::jsonl::JsonlReader;
use crate::model::{MemorizationOutcome, SequenceRecord, TokenId};

/// Share of failed sequences above which an audit is abandoned.
pub const DEFAULT_MAX_FAILURE_RATIO: f64 = 0.1;

/// One line of an offline continuations file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuationEntry {
    pub id: String,
    pub generated: Vec<TokenId>,
    pub model_label: String,
}

/// Recorded continuations keyed by sequence id.
pub type ContinuationTable = BTreeMap<String, ContinuationEntry>;

pub fn load_continuations(path: &Path) -> Result<ContinuationTable> {
    let mut table = ContinuationTable::new();
    for item in JsonlReader::<ContinuationEntry>::open(path)? {
        let (line, entry) = item?;
        if table.contains_key(&entry.id) {
            return Err(Error::parse(path, line, format!("repeated id `{}`", entry.id)));
        }
        table.insert(entry.id.clone(), entry);
    }
    Ok(table)
}

pub enum ContinuationSource {
    Endpoint {
        endpoint: InferenceEndpoint,
        model_label: String,
    },
    Offline(ContinuationTable),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFailure {
    pub seq_id: String,
    pub reason: String,
}

/// Outcomes and failures, each sorted by sequence id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub outcomes: Vec<MemorizationOutcome>,
    pub failures: Vec<AuditFailure>,
}

fn score(
    record: &SequenceRecord,
    spec: &SplitSpec,
    generated: Vec<TokenId>,
    model_label: &str,
) -> Result<MemorizationOutcome> {
    let (prefix, suffix) = split_prefix_suffix(record, spec)?;
    let v = check_verbatim(&generated, suffix)?;
    Ok(MemorizationOutcome {
        seq_id: record.id.clone(),
        prefix_len: prefix.len(),
        suffix_len: suffix.len(),
        generated,
        memorized: v.memorized,
        fractional: v.fractional,
        model_label: model_label.to_string(),
    })
}

fn too_many(failed: usize, total: usize, ratio: f64) -> bool {
    failed as f64 > ratio * total as f64
}

fn finish(
    mut outcomes: Vec<MemorizationOutcome>,
    mut failures: Vec<AuditFailure>,
    total: usize,
    ratio: f64,
) -> Result<AuditReport> {
    if too_many(failures.len(), total, ratio) {
        return Err(Error::AuditAborted {
            failed: failures.len(),
            total,
            limit: ratio * 100.0,
        });
    }
    outcomes.sort_by(|a, b| a.seq_id.cmp(&b.seq_id));
    failures.sort_by(|a, b| a.seq_id.cmp(&b.seq_id));
    Ok(AuditReport { outcomes, failures })
}

fn check_split(samples: &[SequenceRecord], spec: &SplitSpec) -> Result<()> {
    samples
        .iter()
        .try_for_each(|r| spec.prefix_len(r.tokens.len()).map(|_| ()))
}

/// Scores recorded continuations. Sequences absent from `table`, or with a
/// continuation of the wrong length, are failures.
pub fn run_audit_offline(
    samples: &[SequenceRecord],
    spec: &SplitSpec,
    table: &ContinuationTable,
    max_failure_ratio: f64,
) -> Result<AuditReport> {
    check_split(samples, spec)?;
    let mut outcomes = Vec::with_capacity(samples.len());
    let mut failures = Vec::new();
    for r in samples {
        let res = match table.get(&r.id) {
            Some(entry) => score(r, spec, entry.generated.clone(), &entry.model_label),
            None => Err(Error::InsufficientData("no recorded continuation".into())),
        };
        match res {
            Ok(o) => outcomes.push(o),
            Err(e) => failures.push(AuditFailure {
                seq_id: r.id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    finish(outcomes, failures, samples.len(), max_failure_ratio)
}

/// Queries the endpoint with at most `max_in_flight` outstanding requests.
/// Stops early once the failure share can no longer stay under the limit.
pub async fn run_audit_online(
    samples: &[SequenceRecord],
    spec: &SplitSpec,
    endpoint: &InferenceEndpoint,
    model_label: &str,
    max_failure_ratio: f64,
) -> Result<AuditReport> {
    endpoint.validate()?;
    check_split(samples, spec)?;
    let client = endpoint.client()?;
    let total = samples.len();

    let client = &client;
    let mut results = stream::iter(samples)
        .map(|r| async move {
            let res = async {
                let (prefix, suffix) = split_prefix_suffix(r, spec)?;
                let generated = fetch_continuation(client, endpoint, prefix, suffix.len()).await?;
                score(r, spec, generated, model_label)
            }
            .await;
            res.map_err(|e| AuditFailure {
                seq_id: r.id.clone(),
                reason: e.to_string(),
            })
        })
        .buffer_unordered(endpoint.max_in_flight);

    let mut outcomes = Vec::with_capacity(total);
    let mut failures = Vec::new();
    while let Some(res) = results.next().await {
        match res {
            Ok(o) => outcomes.push(o),
            Err(f) => {
                failures.push(f);
                if too_many(failures.len(), total, max_failure_ratio) {
                    break;
                }
            }
        }
    }
    finish(outcomes, failures, total, max_failure_ratio)
}

pub async fn run_audit(
    samples: &[SequenceRecord],
    spec: &SplitSpec,
    source: &ContinuationSource,
    max_failure_ratio: f64,
) -> Result<AuditReport> {
    match source {
        ContinuationSource::Endpoint {
            endpoint,
            model_label,
        } => run_audit_online(samples, spec, endpoint, model_label, max_failure_ratio).await,
        ContinuationSource::Offline(table) => {
            run_audit_offline(samples, spec, table, max_failure_ratio)
        }
    }
}
