use std::fs;
use std::path::Path;
use std::process::Command;

use idmem::cli::{run, EXIT_AUDIT, EXIT_INPUT, EXIT_OK};
use idmem::jsonl::{read_jsonl, write_jsonl};
use idmem::memorization::{split_prefix_suffix, ContinuationEntry, MockEntry, SplitSpec};
use idmem::model::{IdEstimate, MemorizationOutcome, SequenceRecord};

fn idmem(args: &[&str]) -> i32 {
    run(std::iter::once("idmem").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(n: usize) -> Vec<SequenceRecord> {
    (0..n)
        .map(|i| {
            let toks = (0..150).map(|t| (t * 13 + i as u32 % 7) % 997).collect();
            let mut r = SequenceRecord::new(format!("c{i:04}"), toks, 1);
            r.dup_count = None;
            r
        })
        .collect()
}

#[test]
fn synth_estimate_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let clouds = out.join("clouds");
    for d in ["2", "4"] {
        assert_eq!(
            idmem(&["--out", s(&clouds), "--seed", d, "synth", "hypercube", "--d", d, "--n", "300", "--ambient", "16"]),
            EXIT_OK
        );
    }
    assert_eq!(idmem(&["--out", s(&out.join("est")), "estimate-id", "--clouds", s(&clouds)]), EXIT_OK);
    let est: Vec<IdEstimate> = read_jsonl(&out.join("est/id_estimates.jsonl")).unwrap();
    assert_eq!(est.len(), 2);

    assert_eq!(idmem(&["--out", s(&out.join("p")), "synth", "planted", "--n", "1500"]), EXIT_OK);
    let exp = out.join("p/experiments.jsonl");
    for sub in ["r1", "r2"] {
        assert_eq!(idmem(&["--out", s(&out.join(sub)), "report", "--experiments", s(&exp)]), EXIT_OK);
    }
    for f in ["summary.csv", "report.json", "fig_joint_histogram.svg", "fig_memorization_by_id.svg"] {
        let a = fs::read(out.join("r1").join(f)).unwrap();
        assert_eq!(a, fs::read(out.join("r2").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn degenerate_cloud_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    fs::write(
        &p,
        "{\"seq_id\":\"bad\",\"special\":[0,0,0],\"vectors\":[[1.0],[1.0],[1.0]]}\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    assert_eq!(idmem(&["--out", s(&out), "estimate-id", "--clouds", s(&p)]), EXIT_OK);
    let failed = fs::read_to_string(out.join("id_estimates.failures.jsonl")).unwrap();
    assert!(failed.contains("\"bad\""));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    assert_eq!(idmem(&["estimate-id", "--clouds", s(&missing)]), EXIT_INPUT);
    assert_eq!(idmem(&["dedup", "--corpus", s(&missing)]), EXIT_INPUT);
    assert_eq!(idmem(&["no-such-command"]), EXIT_INPUT);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seed = \"x\"").unwrap();
    assert_eq!(idmem(&["--config", s(&bad), "dedup"]), EXIT_INPUT);
}

#[test]
fn dedup_then_stratify() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("corpus.jsonl");
    write_jsonl(&c, None, &corpus(70)).unwrap();
    let out = dir.path().join("o");
    assert_eq!(idmem(&["--out", s(&out), "dedup", "--corpus", s(&c)]), EXIT_OK);
    let recs: Vec<SequenceRecord> = read_jsonl(&out.join("corpus.dedup.jsonl")).unwrap();
    assert!(recs.iter().all(|r| r.dup_count == Some(10) && r.dup_computed));

    let deduped = out.join("corpus.dedup.jsonl");
    for sub in ["a", "b"] {
        let o = dir.path().join(sub);
        assert_eq!(
            idmem(&["--out", s(&o), "--seed", "4", "stratify", "--corpus", s(&deduped), "--per-bucket-n", "5"]),
            EXIT_OK
        );
    }
    let a = fs::read(dir.path().join("a/sample.jsonl")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/sample.jsonl")).unwrap());
    let sample: Vec<SequenceRecord> = read_jsonl(&dir.path().join("a/sample.jsonl")).unwrap();
    assert_eq!(sample.len(), 5);
}

fn write_sample(dir: &Path, n: usize) -> (std::path::PathBuf, Vec<SequenceRecord>) {
    let recs: Vec<SequenceRecord> = (0..n)
        .map(|i| SequenceRecord::new(format!("s{i:03}"), (0..150).map(|t| t + i as u32 * 1000).collect(), 1))
        .collect();
    let p = dir.join("sample.jsonl");
    write_jsonl(&p, None, &recs).unwrap();
    (p, recs)
}

#[test]
fn offline_audit_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let (sample, recs) = write_sample(dir.path(), 20);
    let spec = SplitSpec::default();
    let entries: Vec<ContinuationEntry> = recs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (_, suffix) = split_prefix_suffix(r, &spec).unwrap();
            let mut generated = suffix.to_vec();
            if i % 2 == 1 {
                generated[0] += 1;
            }
            ContinuationEntry {
                id: r.id.clone(),
                generated,
                model_label: "rec".into(),
            }
        })
        .collect();
    let cont = dir.path().join("cont.jsonl");
    write_jsonl(&cont, None, &entries).unwrap();
    let out = dir.path().join("o");
    assert_eq!(
        idmem(&["--out", s(&out), "audit", "--sample", s(&sample), "--continuations", s(&cont)]),
        EXIT_OK
    );
    let outcomes: Vec<MemorizationOutcome> = read_jsonl(&out.join("outcomes.jsonl")).unwrap();
    assert_eq!(outcomes.iter().filter(|o| o.memorized).count(), 10);
    assert!(fs::read_to_string(out.join("audit_run.json")).unwrap().contains("started_unix"));

    // 3 of 20 missing is over the 10% limit.
    write_jsonl(&cont, None, &entries[3..]).unwrap();
    assert_eq!(
        idmem(&["--out", s(&out), "audit", "--sample", s(&sample), "--continuations", s(&cont)]),
        EXIT_AUDIT
    );
}

#[test]
fn binary_serves_mock_and_audits() {
    let dir = tempfile::tempdir().unwrap();
    let (sample, recs) = write_sample(dir.path(), 8);
    let spec = SplitSpec::default();
    let lookup: Vec<MockEntry> = recs
        .iter()
        .map(|r| {
            let (prefix, suffix) = split_prefix_suffix(r, &spec).unwrap();
            MockEntry {
                prefix_hash: None,
                prefix_tokens: Some(prefix.to_vec()),
                continuation: suffix.to_vec(),
            }
        })
        .collect();
    let lp = dir.path().join("lookup.jsonl");
    write_jsonl(&lp, None, &lookup).unwrap();

    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let exe = env!("CARGO_BIN_EXE_idmem");
    let mut server = Command::new(exe)
        .args(["serve-mock", "--lookup", s(&lp), "--port", &port.to_string()])
        .spawn()
        .unwrap();
    let addr = format!("127.0.0.1:{port}");
    for _ in 0..200 {
        if std::net::TcpStream::connect(&addr).is_ok() {
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(25));
    }
    let out = dir.path().join("o");
    let status = Command::new(exe)
        .args(["--out", s(&out), "audit", "--sample", s(&sample), "--endpoint", &format!("http://{addr}"), "--model-label", "mock"])
        .status()
        .unwrap();
    server.kill().unwrap();
    let _ = server.wait();
    assert_eq!(status.code(), Some(EXIT_OK));
    let outcomes: Vec<MemorizationOutcome> = read_jsonl(&out.join("outcomes.jsonl")).unwrap();
    assert_eq!(outcomes.len(), 8);
    assert!(outcomes.iter().all(|o| o.memorized && o.model_label == "mock"));
}

#[test]
fn config_file_sets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("from-config");
    fs::write(&cfg, format!("seed = 3\nout = {:?}\n\n[planted]\nn = 200\n", s(&out))).unwrap();
    assert_eq!(idmem(&["--config", s(&cfg), "synth", "planted"]), EXIT_OK);
    let text = fs::read_to_string(out.join("experiments.jsonl")).unwrap();
    assert!(text.starts_with("{\"_meta\""));
    assert!(text.contains("\"seed\":3"));
    assert_eq!(text.lines().count(), 1 + 2 * 200);
}
