//! Report assembly: joins estimates with audit outcomes, bins and
//! summarizes them, and renders the summary CSV and the two SVG figures
//! (joint ID / memorization histogram, per-regime memorization-vs-ID
//! panels).
//!
//! All output is a pure function of the input records, so reruns produce
//! byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    bin_by_bucket, loglinear_fit_weighted, spearman, summarize, BinConfig, LogLinearFit,
    TrendStats,
};
use crate::error::{Error, Result};
use crate::ingest::DupBuckets;
use crate::jsonl::RunMeta;
use crate::model::{
    DupBucket, ExperimentRecord, IdEstimate, MemorizationOutcome, RegimeBinSummary,
    SequenceRecord,
};

pub const CSV_HEADER: &str =
    "model_label,dup_bucket,bin_index,id_min,id_max,id_mean,mem_rate,count,stderr";

/// How the joint histogram pools outcomes; recorded in report metadata.
pub const HISTOGRAM_POOLING: &str = "per-sequence memorization rate = unweighted mean over \
all (sequence, model) outcomes of that sequence, pooled across models and duplication buckets";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub bins: BinConfig,
    pub hist_id_bins: usize,
    pub hist_rate_bins: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            bins: BinConfig::default(),
            hist_id_bins: 25,
            hist_rate_bins: 10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinIssues {
    pub missing_outcome: Vec<String>,
    pub missing_estimate: Vec<String>,
    pub unknown_ids: Vec<String>,
    pub outside_buckets: Vec<String>,
}

impl JoinIssues {
    pub fn is_empty(&self) -> bool {
        self.missing_outcome.is_empty()
            && self.missing_estimate.is_empty()
            && self.unknown_ids.is_empty()
            && self.outside_buckets.is_empty()
    }
}

/// Joins sampled records with their ID estimates and every model's audit
/// outcome. Ids that cannot be joined are listed in the returned issues.
pub fn join_experiment(
    samples: &[SequenceRecord],
    estimates: &[IdEstimate],
    outcomes: &[MemorizationOutcome],
    buckets: &DupBuckets,
) -> Result<(Vec<ExperimentRecord>, JoinIssues)> {
    let est: BTreeMap<&str, &IdEstimate> = estimates.iter().map(|e| (e.seq_id.as_str(), e)).collect();
    let mut outs: BTreeMap<&str, Vec<&MemorizationOutcome>> = BTreeMap::new();
    for o in outcomes {
        outs.entry(o.seq_id.as_str()).or_default().push(o);
    }
    let known: BTreeSet<&str> = samples.iter().map(|s| s.id.as_str()).collect();
    let mut issues = JoinIssues::default();
    let mut records = Vec::new();

    let mut sorted: Vec<&SequenceRecord> = samples.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for s in sorted {
        let dup = s.dup_count.ok_or_else(|| Error::MissingDupCount { id: s.id.clone() })?;
        let Some(bucket) = buckets.bucket_of(dup) else {
            issues.outside_buckets.push(s.id.clone());
            continue;
        };
        let e = est.get(s.id.as_str());
        let o = outs.get(s.id.as_str());
        if e.is_none() {
            issues.missing_estimate.push(s.id.clone());
        }
        if o.is_none() {
            issues.missing_outcome.push(s.id.clone());
        }
        if let (Some(e), Some(os)) = (e, o) {
            let mut os = os.clone();
            os.sort_by(|a, b| a.model_label.cmp(&b.model_label));
            for o in os {
                records.push(ExperimentRecord::new(dup, bucket, (*e).clone(), o.clone())?);
            }
        }
    }
    let unknown: BTreeSet<&str> = est
        .keys()
        .chain(outs.keys())
        .copied()
        .filter(|id| !known.contains(id))
        .collect();
    issues.unknown_ids = unknown.into_iter().map(str::to_string).collect();
    Ok((records, issues))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelTrend {
    pub dup_bucket: DupBucket,
    pub model_label: String,
    #[serde(flatten)]
    pub stats: TrendStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTrend {
    pub model_label: String,
    pub fit: Option<LogLinearFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPanel {
    pub dup_bucket: DupBucket,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointHistogram {
    pub id_edges: Vec<f64>,
    pub rate_edges: Vec<f64>,
    /// `counts[rate_bin][id_bin]`
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n_records: usize,
    pub n_sequences: usize,
    pub summaries: Vec<RegimeBinSummary>,
    pub panel_trends: Vec<PanelTrend>,
    pub model_trends: Vec<ModelTrend>,
    pub skipped_panels: Vec<SkippedPanel>,
    pub histogram: JointHistogram,
}

/// Weighted log-linear fit of per-dup-count memorization rates.
fn dup_trend<'a>(records: impl Iterator<Item = &'a ExperimentRecord>) -> Option<LogLinearFit> {
    let mut by_dup: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = by_dup.entry(r.dup_count).or_default();
        e.0 += usize::from(r.outcome.memorized);
        e.1 += 1;
    }
    let pts: Vec<(u64, f64, f64)> = by_dup
        .into_iter()
        .map(|(n, (hits, total))| (n, hits as f64 / total as f64, total as f64))
        .collect();
    loglinear_fit_weighted(&pts).ok()
}

pub fn build_report(records: &[ExperimentRecord], config: &ReportConfig) -> Result<Report> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no joined records to report on".into()));
    }
    let binned = bin_by_bucket(records, config.bins)?;
    let summaries = summarize(records, &binned.binnings)?;

    let mut panel_trends = Vec::new();
    let mut series: BTreeMap<(DupBucket, &str), Vec<&RegimeBinSummary>> = BTreeMap::new();
    for s in &summaries {
        series.entry((s.dup_bucket, s.model_label.as_str())).or_default().push(s);
    }
    for ((bucket, model), bins) in series {
        let (xs, ys): (Vec<f64>, Vec<f64>) = bins
            .iter()
            .filter_map(|b| b.mem_rate.map(|r| (b.id_mean, r)))
            .unzip();
        let rho = spearman(&xs, &ys).ok();
        let fit = dup_trend(
            records
                .iter()
                .filter(|r| r.dup_bucket == bucket && r.outcome.model_label == model),
        );
        panel_trends.push(PanelTrend {
            dup_bucket: bucket,
            model_label: model.to_string(),
            stats: TrendStats::new(fit, rho),
        });
    }

    let models: BTreeSet<&str> = records.iter().map(|r| r.outcome.model_label.as_str()).collect();
    let model_trends = models
        .into_iter()
        .map(|m| ModelTrend {
            model_label: m.to_string(),
            fit: dup_trend(records.iter().filter(|r| r.outcome.model_label == m)),
        })
        .collect();

    let (histogram, n_sequences) = joint_histogram(records, config)?;
    Ok(Report {
        n_records: records.len(),
        n_sequences,
        summaries,
        panel_trends,
        model_trends,
        skipped_panels: binned
            .skipped
            .into_iter()
            .map(|(dup_bucket, reason)| SkippedPanel { dup_bucket, reason })
            .collect(),
        histogram,
    })
}

fn edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn bin_index(x: f64, lo: f64, hi: f64, n: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    (((x - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1)
}

fn joint_histogram(records: &[ExperimentRecord], config: &ReportConfig) -> Result<(JointHistogram, usize)> {
    if config.hist_id_bins == 0 || config.hist_rate_bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin per axis".into()));
    }
    // seq -> (id, hits, total)
    let mut seqs: BTreeMap<&str, (f64, usize, usize)> = BTreeMap::new();
    for r in records {
        let e = seqs.entry(&r.seq_id).or_insert((r.id_estimate.value, 0, 0));
        e.1 += usize::from(r.outcome.memorized);
        e.2 += 1;
    }
    let lo = seqs.values().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let hi = seqs.values().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    let (nx, ny) = (config.hist_id_bins, config.hist_rate_bins);
    let mut counts = vec![vec![0usize; nx]; ny];
    for &(id, hits, total) in seqs.values() {
        let rate = hits as f64 / total as f64;
        counts[bin_index(rate, 0.0, 1.0, ny)][bin_index(id, lo, hi, nx)] += 1;
    }
    Ok((
        JointHistogram {
            id_edges: edges(lo, hi, nx),
            rate_edges: edges(0.0, 1.0, ny),
            counts,
        },
        seqs.len(),
    ))
}

/// Renders `x` with at most six significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..16).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let rounded: f64 = sci.parse().expect("float");
        let s = format!("{rounded:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

/// Two-decimal rendering used for ID values in human-readable tables.
pub fn fmt_id(x: f64) -> String {
    format!("{x:.2}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(summaries: &[RegimeBinSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&s.model_label),
            csv_field(&s.dup_bucket.to_string()),
            s.bin_index,
            fmt_sig(s.id_min),
            fmt_sig(s.id_max),
            fmt_sig(s.id_mean),
            opt(s.mem_rate),
            s.count,
            opt(s.stderr),
        );
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn svg_meta(out: &mut String, meta: &RunMeta) {
    let _ = writeln!(
        out,
        "<metadata>{}</metadata>",
        xml_escape(&serde_json::to_string(meta).expect("meta serializes"))
    );
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub fn joint_histogram_svg(h: &JointHistogram, meta: &RunMeta) -> String {
    let (nx, ny) = (h.id_edges.len() - 1, h.rate_edges.len() - 1);
    let (left, top, cell_w, cell_h) = (60.0, 30.0, 16.0, 20.0);
    let (pw, ph) = (cell_w * nx as f64, cell_h * ny as f64);
    let (w, hgt) = (left + pw + 20.0, top + ph + 50.0);
    let max = h.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{hgt:.0}" viewBox="0 0 {w:.0} {hgt:.0}" font-family="sans-serif" font-size="11">"#
    );
    svg_meta(&mut s, meta);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">Memorization rate vs. intrinsic dimension</text>"#,
        left + pw / 2.0
    );
    for (iy, row) in h.counts.iter().enumerate() {
        for (ix, &c) in row.iter().enumerate() {
            let x = left + ix as f64 * cell_w;
            let y = top + ph - (iy + 1) as f64 * cell_h;
            let shade = 1.0 - 0.9 * (c as f64 / max).sqrt();
            let v = (255.0 * shade).round() as u8;
            let _ = writeln!(
                s,
                r##"<rect class="cell" x="{x:.1}" y="{y:.1}" width="{cell_w:.1}" height="{cell_h:.1}" fill="#{v:02x}{v:02x}ff" data-count="{c}"/>"##
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
    );
    for ix in (0..=nx).step_by(5.max(nx / 5)) {
        let x = left + ix as f64 * cell_w;
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            top + ph + 14.0,
            fmt_id(h.id_edges[ix])
        );
    }
    for iy in (0..=ny).step_by(2.max(ny / 5)) {
        let y = top + ph - iy as f64 * cell_h;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.1}</text>"#,
            left - 4.0,
            y + 4.0,
            h.rate_edges[iy]
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">intrinsic dimension</text>"#,
        left + pw / 2.0,
        top + ph + 32.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">memorization rate</text>"#,
        top + ph / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// One panel per duplication bucket, one polyline per model over the
/// quantile bins (empty bins are skipped).
pub fn panels_svg(summaries: &[RegimeBinSummary], meta: &RunMeta) -> String {
    let buckets: BTreeSet<DupBucket> = summaries.iter().map(|s| s.dup_bucket).collect();
    let models: Vec<&str> = summaries
        .iter()
        .map(|s| s.model_label.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let lo = summaries.iter().map(|s| s.id_mean).fold(f64::INFINITY, f64::min);
    let hi = summaries.iter().map(|s| s.id_mean).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (0.0, 1.0) };

    let (pw, ph, left, top, gap) = (260.0, 200.0, 50.0, 40.0, 30.0);
    let n = buckets.len().max(1) as f64;
    let w = left + n * (pw + gap) + 10.0;
    let h = top + ph + 60.0 + 16.0 * models.len() as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    svg_meta(&mut s, meta);
    for (p, bucket) in buckets.iter().enumerate() {
        let x0 = left + p as f64 * (pw + gap);
        let sx = |v: f64| x0 + (v - lo) / (hi - lo) * pw;
        let sy = |r: f64| top + ph - r * ph;
        let _ = writeln!(s, r#"<g class="panel" data-bucket="{bucket}">"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">dup {bucket}</text>"#,
            x0 + pw / 2.0,
            top - 12.0
        );
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
        );
        for t in 0..=4 {
            let r = t as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{r:.2}</text>"#,
                x0 - 4.0,
                sy(r) + 4.0
            );
            let v = lo + (hi - lo) * r;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(v),
                top + ph + 14.0,
                fmt_id(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">intrinsic dimension</text>"#,
            x0 + pw / 2.0,
            top + ph + 30.0
        );
        for (m, model) in models.iter().enumerate() {
            let pts: Vec<String> = summaries
                .iter()
                .filter(|x| x.dup_bucket == *bucket && x.model_label == *model)
                .filter_map(|x| x.mem_rate.map(|r| format!("{:.2},{:.2}", sx(x.id_mean), sy(r))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="series" data-model="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                xml_escape(model),
                PALETTE[m % PALETTE.len()],
                pts.join(" ")
            );
        }
        s.push_str("</g>\n");
    }
    for (m, model) in models.iter().enumerate() {
        let y = top + ph + 50.0 + 16.0 * m as f64;
        let color = PALETTE[m % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            left + 20.0,
            left + 26.0,
            y + 4.0,
            xml_escape(model)
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(14 {:.1}) rotate(-90)" text-anchor="middle">memorization rate</text>"#,
        top + ph / 2.0
    );
    s.push_str("</svg>\n");
    s
}

#[derive(Serialize)]
struct ReportFile<'a> {
    _meta: &'a RunMeta,
    histogram_pooling: &'static str,
    join: &'a JoinIssues,
    n_records: usize,
    n_sequences: usize,
    skipped_panels: &'a [SkippedPanel],
    panel_trends: &'a [PanelTrend],
    model_trends: &'a [ModelTrend],
    histogram: &'a JointHistogram,
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.json";
pub const HISTOGRAM_FILE: &str = "fig_joint_histogram.svg";
pub const PANELS_FILE: &str = "fig_memorization_by_id.svg";

pub fn write_report(dir: &Path, report: &Report, join: &JoinIssues, meta: &RunMeta) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: String| {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(p, e))
    };
    write(SUMMARY_FILE, summary_csv(&report.summaries))?;
    let file = ReportFile {
        _meta: meta,
        histogram_pooling: HISTOGRAM_POOLING,
        join,
        n_records: report.n_records,
        n_sequences: report.n_sequences,
        skipped_panels: &report.skipped_panels,
        panel_trends: &report.panel_trends,
        model_trends: &report.model_trends,
        histogram: &report.histogram,
    };
    write(REPORT_FILE, serde_json::to_string_pretty(&file)? + "\n")?;
    write(HISTOGRAM_FILE, joint_histogram_svg(&report.histogram, meta))?;
    write(PANELS_FILE, panels_svg(&report.summaries, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(2.0833333333), "2.08333");
        assert_eq!(fmt_sig(123456789.0), "123457000");
        assert_eq!(fmt_sig(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig(9.9999999), "10");
        assert_eq!(fmt_sig(-3.5), "-3.5");
        assert_eq!(fmt_sig(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn id_two_decimals() {
        assert_eq!(fmt_id(2.0791), "2.08");
        assert_eq!(fmt_id(9.07), "9.07");
    }

    #[test]
    fn csv_has_header_and_blank_null_rate() {
        let rows = vec![RegimeBinSummary {
            model_label: "6.0B".into(),
            dup_bucket: DupBucket { lo: 1, hi: 10 },
            bin_index: 0,
            id_min: 1.0,
            id_max: 2.0,
            id_mean: 1.5,
            mem_rate: None,
            count: 0,
            stderr: None,
        }];
        let csv = summary_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("6.0B,\"[1,10)\",0,1,2,1.5,,0,"));
    }

    #[test]
    fn xml_is_escaped() {
        assert_eq!(xml_escape("a<b&\"c\""), "a&lt;b&amp;&quot;c&quot;");
    }
}
