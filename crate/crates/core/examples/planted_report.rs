//! Generate a planted experiment with a known ID effect, then bin,
//! summarize and plot it.
//!
//! ```bash
//! cargo run --release --example planted_report [OUT_DIR]
//! ```

use idmem::analysis::{gen_planted_experiment, PlantedConfig, PlantedModel};
use idmem::jsonl::RunMeta;
use idmem::report::{build_report, write_report, JoinIssues, ReportConfig};

fn main() -> idmem::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "planted-report".into());
    let config = PlantedConfig {
        n: 10_000,
        seed: 5,
        models: vec![
            PlantedModel::new("small", -1.0, 1.0, 0.6),
            PlantedModel::new("large", 0.5, 1.0, 0.6),
        ],
        ..Default::default()
    };
    let exp = gen_planted_experiment(&config)?;
    let report = build_report(&exp.records, &ReportConfig::default())?;

    println!("{:<12} {:<6} {:>8}", "bucket", "model", "rho");
    for t in &report.panel_trends {
        let rho = t.stats.spearman_rho.map_or("-".into(), |r| format!("{r:.3}"));
        println!("{:<12} {:<6} {:>8}", t.dup_bucket.to_string(), t.model_label, rho);
    }
    for m in &report.model_trends {
        if let Some(f) = &m.fit {
            println!("{}: rate ~ {:.3} + {:.3} log10(dup)", m.model_label, f.intercept, f.slope);
        }
    }

    write_report(out.as_ref(), &report, &JoinIssues::default(), &RunMeta::new(5, "example"))?;
    println!("wrote {out}/");
    Ok(())
}
