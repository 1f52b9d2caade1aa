//! Run the audit over HTTP against a local lookup-table server.
//!
//! ```bash
//! cargo run --example audit_mock_server
//! ```

use idmem::memorization::{
    run_audit_online, spawn_mock, split_prefix_suffix, InferenceEndpoint, MockTable, SplitSpec,
};
use idmem::model::SequenceRecord;

#[tokio::main]
async fn main() -> idmem::Result<()> {
    let spec = SplitSpec { suffix_len: 50 };
    let samples: Vec<SequenceRecord> = (0..40u32)
        .map(|i| SequenceRecord::new(format!("s{i:02}"), (0..150).map(|t| t * 31 + i).collect(), 1))
        .collect();

    // The server knows the true suffix for every fifth sequence.
    let mut table = MockTable::new();
    for r in samples.iter().step_by(5) {
        let (prefix, suffix) = split_prefix_suffix(r, &spec)?;
        table.insert(prefix, suffix.to_vec());
    }
    let (addr, server) = spawn_mock(table)
        .await
        .map_err(|e| idmem::Error::Transport(e.to_string()))?;

    let mut endpoint = InferenceEndpoint::new(format!("http://{addr}"));
    endpoint.max_in_flight = 8;
    let report = run_audit_online(&samples, &spec, &endpoint, "mock", 0.1).await?;
    let hits: Vec<&str> = report
        .outcomes
        .iter()
        .filter(|o| o.memorized)
        .map(|o| o.seq_id.as_str())
        .collect();
    println!("served from http://{addr}/v1/generate");
    println!("{} audited, {} memorized: {}", report.outcomes.len(), hits.len(), hits.join(" "));
    server.abort();
    Ok(())
}
