//! Count exact duplicates in a corpus file and draw a seeded, stratified
//! sample per duplication bucket.
//!
//! ```bash
//! cargo run --example dedup_and_stratify
//! ```

use idmem::ingest::{load_corpus, resolve_dup_counts, stratify, DupBuckets, SampleSpec};
use idmem::jsonl::write_jsonl;
use idmem::model::SequenceRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEN: usize = 16;

fn main() -> idmem::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // Distinct texts, each repeated a heavy-tailed number of times.
    let mut corpus = Vec::new();
    for t in 0..400 {
        let tokens: Vec<u32> = (0..LEN).map(|_| rng.random_range(0..50_000)).collect();
        let copies = (10f64.powf(rng.random::<f64>() * 2.5)) as usize;
        for c in 0..copies.max(1) {
            let mut r = SequenceRecord::new(format!("doc{t:03}-{c:03}"), tokens.clone(), 1);
            r.dup_count = None;
            corpus.push(r);
        }
    }

    let path = std::env::temp_dir().join("idmem-corpus.jsonl");
    write_jsonl(&path, None, &corpus)?;
    let mut records = load_corpus(&path, LEN)?;
    resolve_dup_counts(&mut records);
    println!("{} records from {}", records.len(), path.display());

    let buckets = DupBuckets::new(vec![1, 10, 100, 1000])?;
    let sample = stratify(&records, &buckets, SampleSpec::new(50, 42)?)?;
    for b in &sample.buckets {
        println!(
            "{:<12} population {:>5}  sampled {:>3}{}",
            b.bucket.to_string(),
            b.population,
            b.records.len(),
            if b.shortfall { "  (short)" } else { "" }
        );
    }
    println!("excluded {}", sample.excluded);
    Ok(())
}
