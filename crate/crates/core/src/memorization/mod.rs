//! Prefix/suffix memorization audit.
//!
//! A sequence is split into a prefix and a suffix; the model is prompted
//! with the prefix under greedy decoding and the sequence counts as
//! memorized when the continuation equals the suffix token for token.

mod audit;
mod client;
mod mock;
mod protocol;

use serde::{Deserialize, Serialize};

pub use audit::{
    load_continuations, run_audit, run_audit_offline, run_audit_online, AuditFailure,
    AuditReport, ContinuationEntry, ContinuationSource, ContinuationTable,
    DEFAULT_MAX_FAILURE_RATIO,
};
pub use client::{fetch_continuation, InferenceEndpoint};
pub use mock::{serve_mock, spawn_mock, MockEntry, MockTable};
pub use protocol::{GenerateRequest, GenerateResponse, GREEDY};

use crate::error::{Error, Result};
use crate::model::{SequenceRecord, TokenId};

pub const DEFAULT_SUFFIX_LEN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub suffix_len: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            suffix_len: DEFAULT_SUFFIX_LEN,
        }
    }
}

impl SplitSpec {
    pub fn prefix_len(&self, seq_len: usize) -> Result<usize> {
        if self.suffix_len == 0 || self.suffix_len >= seq_len {
            return Err(Error::InvalidParameter(format!(
                "suffix_len {} must lie in 1..{seq_len}",
                self.suffix_len
            )));
        }
        Ok(seq_len - self.suffix_len)
    }
}

pub fn split_prefix_suffix<'a>(
    record: &'a SequenceRecord,
    spec: &SplitSpec,
) -> Result<(&'a [TokenId], &'a [TokenId])> {
    let p = spec.prefix_len(record.tokens.len())?;
    Ok(record.tokens.split_at(p))
}

/// Verbatim flag and longest-common-prefix share of a continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub memorized: bool,
    pub fractional: f64,
}

pub fn check_verbatim(generated: &[TokenId], reference: &[TokenId]) -> Result<Verdict> {
    if generated.len() != reference.len() {
        return Err(Error::Protocol(format!(
            "continuation has {} tokens, reference suffix has {}",
            generated.len(),
            reference.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::InvalidParameter("empty reference suffix".into()));
    }
    let lcp = generated
        .iter()
        .zip(reference)
        .take_while(|(g, r)| g == r)
        .count();
    Ok(Verdict {
        memorized: lcp == reference.len(),
        fractional: lcp as f64 / reference.len() as f64,
    })
}
