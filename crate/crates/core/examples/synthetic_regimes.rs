//! Compares the five fusion methods on synthetic data under two accuracy
//! regimes: similar unimodal accuracies, and a much stronger video model.
//!
//! cargo run --example synthetic_regimes -- [seed]

use emofuse::report::{render_report, ReportFormat};
use emofuse::{run_benchmark, FusionConfig, SynthParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    for (name, acc_audio, acc_video) in [("similar accuracies", 0.72, 0.72), ("video-dominant", 0.59, 0.88)] {
        let params = SynthParams::new(5000, acc_audio, acc_video, seed);
        let report = run_benchmark(&params, &FusionConfig::default())?;
        println!("## {name} (audio {acc_audio}, video {acc_video}, seed {seed})\n");
        let md = String::from_utf8(render_report(&report, ReportFormat::Markdown))?;
        // Summary table only; confusion matrices follow the first blank line after it.
        for line in md.lines().skip_while(|l| !l.starts_with("| Method")).take_while(|l| !l.is_empty()) {
            println!("{line}");
        }
        println!();
    }
    Ok(())
}
