use std::collections::{BTreeMap, HashMap};

use crate::model::{token_hash, SequenceRecord, TokenId};

/// One distinct token sequence and the ids that carry it.
type Group<'a> = (&'a [TokenId], Vec<&'a str>);

/// Number of records sharing each record's exact token sequence.
///
/// Sequences are grouped by a 128-bit content hash; records landing in the
/// same hash slot are compared in full, so a hash collision can never merge
/// two different sequences.
pub fn count_exact_duplicates<'a>(
    records: impl IntoIterator<Item = &'a SequenceRecord>,
) -> BTreeMap<String, u64> {
    let mut slots: HashMap<u128, Vec<Group<'a>>> = HashMap::new();
    for r in records {
        let groups = slots.entry(token_hash(&r.tokens)).or_default();
        match groups.iter_mut().find(|(t, _)| *t == r.tokens.as_slice()) {
            Some((_, ids)) => ids.push(&r.id),
            None => groups.push((&r.tokens, vec![&r.id])),
        }
    }
    let mut counts = BTreeMap::new();
    for (_, ids) in slots.into_values().flatten() {
        let n = ids.len() as u64;
        for id in ids {
            counts.insert(id.to_string(), n);
        }
    }
    counts
}

/// Fills missing `dup_count`s with exact counts over `records`. Supplied
/// counts are left untouched; computed ones are flagged.
pub fn resolve_dup_counts(records: &mut [SequenceRecord]) {
    if records.iter().all(|r| r.dup_count.is_some()) {
        return;
    }
    let counts = count_exact_duplicates(records.iter());
    for r in records.iter_mut().filter(|r| r.dup_count.is_none()) {
        r.dup_count = counts.get(&r.id).copied();
        r.dup_computed = true;
    }
}
