mod common;

use std::collections::BTreeSet;

use common::*;
use idmem::ingest::{
    count_exact_duplicates, decode_binary, encode_binary, load_corpus, read_pointclouds,
    resolve_dup_counts, stratify, write_pointclouds, CloudFormat, DupBuckets, SampleSpec,
};
use idmem::jsonl::write_jsonl;
use idmem::model::{PointCloud, SequenceRecord};
use idmem::Error;
use rand::Rng;

#[test]
fn dedup_matches_pairwise_oracle() {
    for seed in 0..25 {
        let corpus = random_corpus(seed, 1 + (seed as usize * 13) % 200, 6, 3);
        assert_eq!(count_exact_duplicates(&corpus), dup_oracle(&corpus), "seed {seed}");
    }
}

#[test]
fn resolve_keeps_supplied_counts() {
    let mut recs = random_corpus(1, 30, 4, 2);
    recs[0].dup_count = Some(77);
    resolve_dup_counts(&mut recs);
    assert_eq!(recs[0].dup_count, Some(77));
    assert!(!recs[0].dup_computed);
    let oracle = dup_oracle(&recs);
    for r in &recs[1..] {
        assert!(r.dup_computed);
        assert_eq!(r.dup_count, Some(oracle[&r.id]));
    }
}

#[test]
fn corpus_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    let good = SequenceRecord::new("a", vec![1; 150], 1);
    let short = SequenceRecord::new("b", vec![1; 149], 1);
    write_jsonl(&p, None, [&good, &short]).unwrap();
    match load_corpus(&p, 150) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }

    write_jsonl(&p, None, [&good, &good]).unwrap();
    assert!(matches!(load_corpus(&p, 150), Err(Error::DuplicateId { .. })));

    let zero = SequenceRecord::new("z", vec![1; 150], 0);
    write_jsonl(&p, None, [&zero]).unwrap();
    assert!(load_corpus(&p, 150).is_err());
}

fn bucketed_corpus(per_bucket: usize) -> Vec<SequenceRecord> {
    let mut r = rng(9);
    let mut out = Vec::new();
    for (b, (lo, hi)) in [(1u64, 10u64), (10, 100), (100, 1000)].into_iter().enumerate() {
        for i in 0..per_bucket {
            let dup = r.random_range(lo..hi);
            out.push(SequenceRecord::new(format!("b{b}-{i:05}"), vec![i as u32; 4], dup));
        }
    }
    out
}

#[test]
fn stratify_partitions_buckets() {
    let corpus = bucketed_corpus(300);
    let buckets = DupBuckets::default();
    let s = stratify(&corpus, &buckets, SampleSpec::new(100, 3).unwrap()).unwrap();
    let mut seen = BTreeSet::new();
    for b in &s.buckets {
        assert_eq!(b.records.len(), 100);
        assert_eq!(b.population, 300);
        let ids: Vec<&str> = b.records.iter().map(|r| r.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        for r in &b.records {
            assert!(b.bucket.contains(r.dup_count.unwrap()));
            assert!(seen.insert(r.id.clone()));
        }
    }
}

#[test]
fn stratify_is_seeded_and_order_free() {
    let corpus = bucketed_corpus(200);
    let buckets = DupBuckets::default();
    let spec = SampleSpec::new(50, 11).unwrap();
    let a = stratify(&corpus, &buckets, spec).unwrap();
    let mut reversed = corpus.clone();
    reversed.reverse();
    let b = stratify(&reversed, &buckets, spec).unwrap();
    assert_eq!(a, b);
    let c = stratify(&corpus, &buckets, SampleSpec::new(50, 12).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn stratify_short_bucket_takes_all() {
    let corpus = bucketed_corpus(20);
    let s = stratify(&corpus, &DupBuckets::default(), SampleSpec::new(50, 0).unwrap()).unwrap();
    assert!(s.buckets.iter().all(|b| b.shortfall && b.records.len() == 20));
}

#[test]
fn stratify_needs_dup_counts() {
    let mut corpus = bucketed_corpus(2);
    corpus[0].dup_count = None;
    let r = stratify(&corpus, &DupBuckets::default(), SampleSpec::new(5, 0).unwrap());
    assert!(matches!(r, Err(Error::MissingDupCount { .. })));
}

#[test]
fn binary_round_trip_is_bit_exact() {
    let mut buf = Vec::new();
    let clouds: Vec<PointCloud> = (0..200)
        .map(|s| random_cloud(s, 1 + s as usize % 17, 1 + s as usize % 9))
        .collect();
    for c in &clouds {
        encode_binary(c, &mut buf).unwrap();
    }
    let back = decode_binary(&buf).unwrap();
    assert_eq!(back.len(), clouds.len());
    for (a, b) in clouds.iter().zip(&back) {
        assert_eq!(a.seq_id(), b.seq_id());
        assert_eq!(a.special_mask(), b.special_mask());
        let bits = |c: &PointCloud| c.coords().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a), bits(b));
    }
}

#[test]
fn files_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = random_cloud(4, 12, 3);
    let mut mask = vec![false; 12];
    mask[0] = true;
    mask[11] = true;
    c = PointCloud::new("seq/ä", 3, c.coords().to_vec(), mask).unwrap();
    for (fmt, name) in [(CloudFormat::Binary, "a.idpc"), (CloudFormat::Text, "a.jsonl")] {
        let p = dir.path().join(name);
        write_pointclouds(&p, [&c, &c], fmt).unwrap();
        assert_eq!(read_pointclouds(&p).unwrap(), vec![c.clone(), c.clone()]);
    }
}

#[test]
fn truncated_frame_is_a_framing_error() {
    let mut buf = Vec::new();
    encode_binary(&random_cloud(1, 5, 2), &mut buf).unwrap();
    for cut in [3, 10, buf.len() - 1] {
        assert!(matches!(decode_binary(&buf[..cut]), Err(Error::Framing(_))), "cut {cut}");
    }
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(decode_binary(&bad).is_err());
}
