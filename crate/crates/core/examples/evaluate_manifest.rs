//! Loads a prediction manifest and prints the per-method report.
//!
//! cargo run --example evaluate_manifest -- [manifest.json] [json|csv|md]

use std::collections::BTreeSet;

use emofuse::eval::ReportMethod;
use emofuse::report::{render_report, ReportFormat};
use emofuse::{evaluate, load_manifest, FusionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/sample_manifest.json").to_string());
    let format: ReportFormat = args.next().as_deref().unwrap_or("md").parse()?;

    let manifest = load_manifest(&path)?;
    let counts = manifest.class_counts();
    println!("{} clips from {path}", manifest.clips.len());
    println!("ground truth counts: {counts:?}\n");

    let methods: BTreeSet<ReportMethod> = ReportMethod::ALL.into_iter().collect();
    let report = evaluate(&manifest, &methods, &FusionConfig::default())?;
    print!("{}", String::from_utf8(render_report(&report, format))?);
    Ok(())
}
