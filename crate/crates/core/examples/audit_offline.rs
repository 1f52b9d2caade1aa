//! Score recorded continuations against the true suffixes.
//!
//! ```bash
//! cargo run --example audit_offline
//! ```

use idmem::memorization::{run_audit_offline, ContinuationEntry, ContinuationTable, SplitSpec};
use idmem::model::SequenceRecord;

fn main() -> idmem::Result<()> {
    let spec = SplitSpec { suffix_len: 50 };
    let samples: Vec<SequenceRecord> = (0..10u32)
        .map(|i| SequenceRecord::new(format!("s{i}"), (0..150).map(|t| t * 7 + i).collect(), 1))
        .collect();

    let mut table = ContinuationTable::new();
    for (i, r) in samples.iter().enumerate() {
        let mut generated = r.tokens[100..].to_vec();
        // Every third continuation drifts after ten tokens.
        if i % 3 == 0 {
            generated[10..].iter_mut().for_each(|t| *t = 0);
        }
        table.insert(
            r.id.clone(),
            ContinuationEntry {
                id: r.id.clone(),
                generated,
                model_label: "recorded".into(),
            },
        );
    }

    let report = run_audit_offline(&samples, &spec, &table, 0.1)?;
    for o in &report.outcomes {
        println!("{:<4} memorized {:<5} fractional {:.2}", o.seq_id, o.memorized, o.fractional);
    }
    Ok(())
}
