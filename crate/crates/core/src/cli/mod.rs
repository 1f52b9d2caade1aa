//! Command-line front end.
//!
//! Subcommands: `estimate-id`, `dedup`, `stratify`, `audit`, `report`,
//! `synth`, `serve-mock`. Exit codes: 0 success (warnings allowed), 1
//! output could not be written, 2 input error, 3 audit failure threshold
//! exceeded.

mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{EndpointConfig, Paths, RunConfig};

use crate::analysis::{
    gen_hypercube, gen_planted_experiment, gen_sphere_surface, Link, PlantedModel,
};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, MleParams, TwoNNParams};
use crate::ingest::{
    clean_cloud, count_exact_duplicates, load_corpus, read_pointclouds, resolve_dup_counts,
    stratify, write_pointclouds, CloudFormat, DupBuckets, SampleSpec,
};
use crate::jsonl::{read_jsonl, write_jsonl, RunMeta};
use crate::memorization::{
    load_continuations, run_audit, ContinuationSource, MockTable, SplitSpec,
};
use crate::model::{ExperimentRecord, IdEstimate, MemorizationOutcome, PointCloud, TwoNNFit};
use crate::report::{build_report, fmt_id, join_experiment, write_report, ReportConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "idmem", version, about = "Intrinsic dimension vs. verbatim memorization")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the intrinsic dimension of every point cloud.
    EstimateId(EstimateArgs),
    /// Compute exact duplicate counts for a corpus.
    Dedup(DedupArgs),
    /// Sample sequences stratified by duplication count.
    Stratify(StratifyArgs),
    /// Prefix/suffix memorization audit against an endpoint or recorded file.
    Audit(AuditArgs),
    /// Bin, summarize and plot estimates joined with audit outcomes.
    Report(ReportArgs),
    /// Generate synthetic clouds or planted experiments.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Serve a lookup-table model over the generation protocol.
    ServeMock(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Twonn,
    Mle,
    Pca,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FitArg {
    Mle,
    LeastSquares,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Point-cloud file (IDPC or JSONL) or a directory of them.
    #[arg(long)]
    pub clouds: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub discard_fraction: Option<f64>,
    #[arg(long, value_enum)]
    pub fit: Option<FitArg>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub variance_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Recount every record, ignoring supplied dup_count values.
    #[arg(long)]
    pub recount: bool,
    #[arg(long)]
    pub sequence_length: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StratifyArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub per_bucket_n: Option<usize>,
    /// Comma-separated bucket edges, e.g. `1,10,100,1000`.
    #[arg(long, value_delimiter = ',')]
    pub buckets: Option<Vec<u64>>,
    #[arg(long)]
    pub sequence_length: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Sampled records (corpus format).
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// Recorded continuations (offline mode).
    #[arg(long, conflicts_with = "endpoint")]
    pub continuations: Option<PathBuf>,
    /// Base URL of a `/v1/generate` server.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model_label: Option<String>,
    #[arg(long)]
    pub suffix_len: Option<usize>,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    #[arg(long)]
    pub timeout_secs: Option<f64>,
    #[arg(long)]
    pub retries: Option<u32>,
    #[arg(long)]
    pub max_failure_ratio: Option<f64>,
    #[arg(long)]
    pub sequence_length: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Pre-joined experiment records (e.g. from `synth planted`).
    #[arg(long, conflicts_with_all = ["sample", "estimates", "outcomes"])]
    pub experiments: Option<PathBuf>,
    #[arg(long)]
    pub sample: Option<PathBuf>,
    #[arg(long)]
    pub estimates: Option<PathBuf>,
    /// Outcome files, one per audited model.
    #[arg(long)]
    pub outcomes: Vec<PathBuf>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub buckets: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Binary,
    Text,
}

#[derive(Debug, Args)]
pub struct CloudSynthArgs {
    /// Intrinsic dimension.
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 64)]
    pub ambient: usize,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LinkArg {
    Logistic,
    Linear,
}

#[derive(Debug, Args)]
pub struct PlantedArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Model as `LABEL:intercept:dup_slope:id_slope`; repeatable.
    #[arg(long = "model")]
    pub models: Vec<String>,
    /// Overrides id_slope of every model.
    #[arg(long)]
    pub id_slope: Option<f64>,
    #[arg(long, value_enum)]
    pub link: Option<LinkArg>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    Hypercube(CloudSynthArgs),
    Sphere(CloudSynthArgs),
    Planted(PlantedArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub lookup: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

type CmdResult = std::result::Result<(), Failure>;

trait Tag<T> {
    fn input(self) -> std::result::Result<T, Failure>;
    fn output(self) -> std::result::Result<T, Failure>;
}

impl<T> Tag<T> for Result<T> {
    fn input(self) -> std::result::Result<T, Failure> {
        self.map_err(|error| Failure {
            code: match error {
                Error::AuditAborted { .. } => EXIT_AUDIT,
                _ => EXIT_INPUT,
            },
            error,
        })
    }

    fn output(self) -> std::result::Result<T, Failure> {
        self.map_err(|error| Failure {
            code: EXIT_OUTPUT,
            error,
        })
    }
}

fn need<'a>(p: &'a Option<PathBuf>, what: &str) -> std::result::Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| Failure {
        code: EXIT_INPUT,
        error: Error::InvalidParameter(format!("no {what} path given")),
    })
}

fn ensure_out(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)).output()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let body = serde_json::to_string_pretty(value).map_err(Error::from).output()? + "\n";
    fs::write(path, body).map_err(|e| Error::io(path, e)).output()
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

pub fn execute(cli: Cli) -> CmdResult {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).input()?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    match cli.command {
        Command::EstimateId(a) => estimate_id(cfg, a),
        Command::Dedup(a) => dedup(cfg, a),
        Command::Stratify(a) => stratify_cmd(cfg, a),
        Command::Audit(a) => audit(cfg, a),
        Command::Report(a) => report(cfg, a),
        Command::Synth(a) => synth(cfg, a),
        Command::ServeMock(a) => serve_mock(cfg, a),
    }
}

fn meta(cfg: &RunConfig) -> RunMeta {
    RunMeta::new(cfg.seed, cfg.hash())
}

fn apply_estimator_flags(cfg: &mut RunConfig, a: &EstimateArgs) -> CmdResult {
    let mut est = match (a.method, cfg.estimator) {
        (Some(MethodArg::Twonn), Estimator::Twonn(p)) | (None, Estimator::Twonn(p)) => {
            Estimator::Twonn(p)
        }
        (Some(MethodArg::Twonn), _) => Estimator::Twonn(TwoNNParams::default()),
        (Some(MethodArg::Mle), Estimator::MleLb(p)) | (None, Estimator::MleLb(p)) => {
            Estimator::MleLb(p)
        }
        (Some(MethodArg::Mle), _) => Estimator::MleLb(MleParams::default()),
        (Some(MethodArg::Pca), e @ Estimator::Pca { .. }) | (None, e @ Estimator::Pca { .. }) => e,
        (Some(MethodArg::Pca), _) => Estimator::Pca {
            variance_threshold: crate::estimators::DEFAULT_VARIANCE_THRESHOLD,
        },
    };
    let misplaced = |flag: &str| Failure {
        code: EXIT_INPUT,
        error: Error::InvalidParameter(format!("--{flag} does not apply to this method")),
    };
    match &mut est {
        Estimator::Twonn(p) => {
            if let Some(f) = a.discard_fraction {
                p.discard_fraction = f;
            }
            if let Some(f) = a.fit {
                p.fit = match f {
                    FitArg::Mle => TwoNNFit::Mle,
                    FitArg::LeastSquares => TwoNNFit::LeastSquares,
                };
            }
            if a.k.is_some() {
                return Err(misplaced("k"));
            }
        }
        Estimator::MleLb(p) => {
            if let Some(k) = a.k {
                p.k = k;
            }
            if a.discard_fraction.is_some() || a.fit.is_some() {
                return Err(misplaced("discard-fraction/fit"));
            }
        }
        Estimator::Pca { variance_threshold } => {
            if let Some(t) = a.variance_threshold {
                *variance_threshold = t;
            }
        }
    }
    cfg.estimator = est;
    Ok(())
}

const ESTIMATES_FILE: &str = "id_estimates.jsonl";
const ESTIMATE_FAILURES_FILE: &str = "id_estimates.failures.jsonl";

fn is_cloud_file(p: &Path) -> bool {
    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
    matches!(ext, "idpc" | "jsonl") && name != ESTIMATES_FILE && name != ESTIMATE_FAILURES_FILE
}

fn cloud_files(path: &Path) -> Result<Vec<PathBuf>> {
    let md = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if !md.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_cloud_file(p))
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Serialize)]
struct CloudFailure {
    seq_id: String,
    reason: String,
}

fn estimate_id(mut cfg: RunConfig, a: EstimateArgs) -> CmdResult {
    if a.clouds.is_some() {
        cfg.paths.clouds = a.clouds.clone();
    }
    apply_estimator_flags(&mut cfg, &a)?;
    let src = need(&cfg.paths.clouds, "clouds")?;
    let mut clouds: Vec<PointCloud> = Vec::new();
    for f in cloud_files(src).input()? {
        clouds.extend(read_pointclouds(&f).input()?);
    }

    let est = cfg.estimator;
    let results: Vec<std::result::Result<IdEstimate, CloudFailure>> = clouds
        .par_iter()
        .map(|c| {
            clean_cloud(c)
                .and_then(|(clean, _)| est.estimate(&clean))
                .map_err(|e| CloudFailure {
                    seq_id: c.seq_id().to_string(),
                    reason: e.to_string(),
                })
        })
        .collect();
    let (mut ok, mut failed) = (Vec::new(), Vec::new());
    for r in results {
        match r {
            Ok(e) => ok.push(e),
            Err(f) => failed.push(f),
        }
    }

    ensure_out(&cfg.out)?;
    let m = meta(&cfg);
    write_jsonl(&cfg.out.join(ESTIMATES_FILE), Some(&m), &ok).output()?;
    write_jsonl(&cfg.out.join(ESTIMATE_FAILURES_FILE), Some(&m), &failed).output()?;

    println!("{:<32} {:>7} {:>8} {:>6}", "seq_id", "method", "ID", "n_used");
    for e in &ok {
        println!("{:<32} {:>7} {:>8} {:>6}", e.seq_id, e.method.to_string(), fmt_id(e.value), e.n_used);
    }
    for f in &failed {
        eprintln!("warning: {}: {}", f.seq_id, f.reason);
    }
    if !failed.is_empty() {
        eprintln!("{} estimates, {} warnings", ok.len(), failed.len());
    }
    Ok(())
}

fn dedup(mut cfg: RunConfig, a: DedupArgs) -> CmdResult {
    if a.corpus.is_some() {
        cfg.paths.corpus = a.corpus;
    }
    if let Some(l) = a.sequence_length {
        cfg.sequence_length = l;
    }
    let mut records = load_corpus(need(&cfg.paths.corpus, "corpus")?, cfg.sequence_length).input()?;
    if a.recount {
        let counts = count_exact_duplicates(&records);
        for r in &mut records {
            r.dup_count = counts.get(&r.id).copied();
            r.dup_computed = true;
        }
    } else {
        resolve_dup_counts(&mut records);
    }
    ensure_out(&cfg.out)?;
    write_jsonl(&cfg.out.join("corpus.dedup.jsonl"), Some(&meta(&cfg)), &records).output()?;
    let computed = records.iter().filter(|r| r.dup_computed).count();
    let max = records.iter().filter_map(|r| r.dup_count).max().unwrap_or(0);
    println!(
        "{} records, {} counts computed, {} supplied, max dup_count {}",
        records.len(),
        computed,
        records.len() - computed,
        max
    );
    Ok(())
}

fn stratify_cmd(mut cfg: RunConfig, a: StratifyArgs) -> CmdResult {
    if a.corpus.is_some() {
        cfg.paths.corpus = a.corpus;
    }
    if let Some(n) = a.per_bucket_n {
        cfg.per_bucket_n = n;
    }
    if let Some(e) = a.buckets {
        cfg.bucket_edges = DupBuckets::new(e).input()?;
    }
    if let Some(l) = a.sequence_length {
        cfg.sequence_length = l;
    }
    let mut records = load_corpus(need(&cfg.paths.corpus, "corpus")?, cfg.sequence_length).input()?;
    resolve_dup_counts(&mut records);
    let spec = SampleSpec::new(cfg.per_bucket_n, cfg.seed).input()?;
    let sample = stratify(&records, &cfg.bucket_edges, spec).input()?;

    ensure_out(&cfg.out)?;
    let m = meta(&cfg);
    let flat: Vec<_> = sample.records().map(|(_, r)| r).collect();
    write_jsonl(&cfg.out.join("sample.jsonl"), Some(&m), flat.iter().copied()).output()?;

    #[derive(Serialize)]
    struct BucketInfo {
        bucket: String,
        population: usize,
        sampled: usize,
        shortfall: bool,
    }
    #[derive(Serialize)]
    struct SampleInfo<'a> {
        _meta: &'a RunMeta,
        excluded: usize,
        buckets: Vec<BucketInfo>,
    }
    let info = SampleInfo {
        _meta: &m,
        excluded: sample.excluded,
        buckets: sample
            .buckets
            .iter()
            .map(|b| BucketInfo {
                bucket: b.bucket.to_string(),
                population: b.population,
                sampled: b.records.len(),
                shortfall: b.shortfall,
            })
            .collect(),
    };
    write_json(&cfg.out.join("sample_buckets.json"), &info)?;
    for b in &info.buckets {
        println!("{:<12} {:>7} of {:>7}", b.bucket, b.sampled, b.population);
        if b.shortfall {
            eprintln!("warning: bucket {} has only {} records", b.bucket, b.population);
        }
    }
    Ok(())
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

fn runtime() -> std::result::Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Runtime::new()
        .map_err(|e| Error::Transport(format!("runtime: {e}")))
        .output()
}

fn audit(mut cfg: RunConfig, a: AuditArgs) -> CmdResult {
    if a.sample.is_some() {
        cfg.paths.sample = a.sample;
    }
    if a.continuations.is_some() {
        cfg.paths.continuations = a.continuations;
        cfg.endpoint.base_url = None;
    }
    if a.endpoint.is_some() {
        cfg.endpoint.base_url = a.endpoint;
        cfg.paths.continuations = None;
    }
    if let Some(l) = a.model_label {
        cfg.model_label = l;
    }
    if let Some(s) = a.suffix_len {
        cfg.split = SplitSpec { suffix_len: s };
    }
    if let Some(n) = a.max_in_flight {
        cfg.endpoint.max_in_flight = n;
    }
    if let Some(t) = a.timeout_secs {
        cfg.endpoint.timeout_secs = t;
    }
    if let Some(r) = a.retries {
        cfg.endpoint.retries = r;
    }
    if let Some(r) = a.max_failure_ratio {
        cfg.max_failure_ratio = r;
    }
    if let Some(l) = a.sequence_length {
        cfg.sequence_length = l;
    }

    let samples = load_corpus(need(&cfg.paths.sample, "sample")?, cfg.sequence_length).input()?;
    let source = match &cfg.paths.continuations {
        Some(p) => ContinuationSource::Offline(load_continuations(p).input()?),
        None => ContinuationSource::Endpoint {
            endpoint: cfg.endpoint.endpoint().input()?,
            model_label: cfg.model_label.clone(),
        },
    };

    let started = unix_now();
    let result = runtime()?.block_on(run_audit(&samples, &cfg.split, &source, cfg.max_failure_ratio));
    let finished = unix_now();

    ensure_out(&cfg.out)?;
    let m = meta(&cfg);
    #[derive(Serialize)]
    struct AuditRun<'a> {
        _meta: &'a RunMeta,
        started_unix: f64,
        finished_unix: f64,
        samples: usize,
        outcomes: usize,
        failures: usize,
        memorized: usize,
        aborted: Option<String>,
    }
    let mut run = AuditRun {
        _meta: &m,
        started_unix: started,
        finished_unix: finished,
        samples: samples.len(),
        outcomes: 0,
        failures: 0,
        memorized: 0,
        aborted: None,
    };
    match result {
        Ok(rep) => {
            write_jsonl(&cfg.out.join("outcomes.jsonl"), Some(&m), &rep.outcomes).output()?;
            write_jsonl(&cfg.out.join("failures.jsonl"), Some(&m), &rep.failures).output()?;
            run.outcomes = rep.outcomes.len();
            run.failures = rep.failures.len();
            run.memorized = rep.outcomes.iter().filter(|o| o.memorized).count();
            write_json(&cfg.out.join("audit_run.json"), &run)?;
            println!(
                "{} outcomes ({} memorized), {} failures",
                run.outcomes, run.memorized, run.failures
            );
            for f in &rep.failures {
                eprintln!("warning: {}: {}", f.seq_id, f.reason);
            }
            Ok(())
        }
        Err(e) => {
            run.aborted = Some(e.to_string());
            write_json(&cfg.out.join("audit_run.json"), &run)?;
            Err(e).input()
        }
    }
}

fn report(mut cfg: RunConfig, a: ReportArgs) -> CmdResult {
    if a.experiments.is_some() {
        cfg.paths.experiments = a.experiments;
    }
    if a.sample.is_some() {
        cfg.paths.sample = a.sample;
    }
    if a.estimates.is_some() {
        cfg.paths.estimates = a.estimates;
    }
    if !a.outcomes.is_empty() {
        cfg.paths.outcomes = a.outcomes;
    }
    if let Some(b) = a.bins {
        cfg.bins.n_bins = b;
    }
    if let Some(e) = a.buckets {
        cfg.bucket_edges = DupBuckets::new(e).input()?;
    }

    let (records, issues) = match &cfg.paths.experiments {
        Some(p) => (read_jsonl::<ExperimentRecord>(p).input()?, Default::default()),
        None => {
            let samples =
                load_corpus(need(&cfg.paths.sample, "sample")?, cfg.sequence_length).input()?;
            let estimates: Vec<IdEstimate> =
                read_jsonl(need(&cfg.paths.estimates, "estimates")?).input()?;
            let mut outcomes: Vec<MemorizationOutcome> = Vec::new();
            if cfg.paths.outcomes.is_empty() {
                return Err(Failure {
                    code: EXIT_INPUT,
                    error: Error::InvalidParameter("no outcomes files given".into()),
                });
            }
            for p in &cfg.paths.outcomes {
                outcomes.extend(read_jsonl::<MemorizationOutcome>(p).input()?);
            }
            join_experiment(&samples, &estimates, &outcomes, &cfg.bucket_edges).input()?
        }
    };
    for id in &issues.missing_outcome {
        eprintln!("warning: {id}: no audit outcome");
    }
    for id in &issues.missing_estimate {
        eprintln!("warning: {id}: no ID estimate");
    }
    for id in &issues.unknown_ids {
        eprintln!("warning: {id}: not in sample");
    }
    if records.is_empty() {
        return Err(Failure {
            code: EXIT_INPUT,
            error: Error::InsufficientData("join produced no records".into()),
        });
    }

    let rcfg = ReportConfig {
        bins: cfg.bins,
        ..Default::default()
    };
    let rep = build_report(&records, &rcfg).input()?;
    write_report(&cfg.out, &rep, &issues, &meta(&cfg)).output()?;
    for p in &rep.skipped_panels {
        eprintln!("warning: bucket {} skipped: {}", p.dup_bucket, p.reason);
    }
    let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
    println!("{:<12} {:<10} {:>8} {:>8}", "bucket", "model", "rho", "slope");
    for t in &rep.panel_trends {
        println!(
            "{:<12} {:<10} {:>8} {:>8}",
            t.dup_bucket.to_string(),
            t.model_label,
            show(t.stats.spearman_rho),
            show(t.stats.slope)
        );
    }
    Ok(())
}

fn parse_model(s: &str) -> Result<PlantedModel> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidParameter(format!("model `{s}` is not LABEL:a:b:c"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    Ok(PlantedModel::new(parts[0], num(parts[1])?, num(parts[2])?, num(parts[3])?))
}

fn synth(cfg: RunConfig, cmd: SynthCommand) -> CmdResult {
    ensure_out(&cfg.out)?;
    match cmd {
        SynthCommand::Hypercube(a) => {
            let cloud = gen_hypercube(a.d, a.ambient, a.n, cfg.seed).input()?;
            write_cloud(&cfg, cloud, a.format)
        }
        SynthCommand::Sphere(a) => {
            let cloud = gen_sphere_surface(a.d, a.ambient, a.n, cfg.seed).input()?;
            write_cloud(&cfg, cloud, a.format)
        }
        SynthCommand::Planted(a) => {
            let mut p = cfg.planted.clone();
            p.seed = cfg.seed;
            p.buckets = cfg.bucket_edges.clone();
            p.suffix_len = cfg.split.suffix_len;
            p.prefix_len = cfg.sequence_length.saturating_sub(cfg.split.suffix_len);
            if let Some(n) = a.n {
                p.n = n;
            }
            if !a.models.is_empty() {
                p.models = a.models.iter().map(|m| parse_model(m)).collect::<Result<_>>().input()?;
            }
            if let Some(c) = a.id_slope {
                p.models.iter_mut().for_each(|m| m.id_slope = c);
            }
            if let Some(l) = a.link {
                p.link = match l {
                    LinkArg::Logistic => Link::Logistic,
                    LinkArg::Linear => Link::Linear,
                };
            }
            let exp = gen_planted_experiment(&p).input()?;
            let mut run_cfg = cfg.clone();
            run_cfg.planted = p;
            let m = meta(&run_cfg);
            write_jsonl(&cfg.out.join("experiments.jsonl"), Some(&m), &exp.records).output()?;
            #[derive(Serialize)]
            struct Planted<'a> {
                _meta: &'a RunMeta,
                config: &'a crate::analysis::PlantedConfig,
            }
            write_json(&cfg.out.join("planted_config.json"), &Planted { _meta: &m, config: &exp.config })?;
            println!("{} experiment records", exp.records.len());
            Ok(())
        }
    }
}

fn write_cloud(cfg: &RunConfig, cloud: PointCloud, format: FormatArg) -> CmdResult {
    let (fmt, ext) = match format {
        FormatArg::Binary => (CloudFormat::Binary, "idpc"),
        FormatArg::Text => (CloudFormat::Text, "jsonl"),
    };
    let path = cfg.out.join(format!("{}.{ext}", cloud.seq_id()));
    write_pointclouds(&path, [&cloud], fmt).output()?;
    println!("{}", path.display());
    Ok(())
}

fn serve_mock(mut cfg: RunConfig, a: ServeArgs) -> CmdResult {
    if a.lookup.is_some() {
        cfg.paths.lookup = a.lookup;
    }
    let table = MockTable::load(need(&cfg.paths.lookup, "lookup")?).input()?;
    let addr = format!("{}:{}", a.host, a.port);
    let rt = runtime()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Error::Transport(format!("bind {addr}: {e}")))
            .input()?;
        eprintln!("serving {} prefixes on http://{addr}/v1/generate", table.len());
        crate::memorization::serve_mock(listener, table)
            .await
            .map_err(|e| Error::Transport(e.to_string()))
            .input()
    })
}
