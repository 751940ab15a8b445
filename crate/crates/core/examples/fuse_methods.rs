//! Runs every fusion method on a few hand-written audio/video predictions.
//!
//! cargo run --example fuse_methods

use emofuse::{fuse_pair, FusionConfig, FusionMethod, Modality, ModalityPrediction, ProbabilityVector, TieBreakPolicy};

fn prediction(modality: Modality, probs: [f64; 6]) -> ModalityPrediction {
    let probs = ProbabilityVector::normalize(probs).expect("valid vector");
    ModalityPrediction::new(modality, probs, TieBreakPolicy::LowestIndex)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Label order: anger, disgust, fearful, happy, neutral, sad.
    let cases = [
        ("modalities agree", [0.6, 0.1, 0.1, 0.1, 0.05, 0.05], [0.7, 0.1, 0.05, 0.05, 0.05, 0.05]),
        ("confident video", [0.1, 0.1, 0.1, 0.55, 0.1, 0.05], [0.05, 0.05, 0.8, 0.05, 0.025, 0.025]),
        ("both unsure", [0.3, 0.25, 0.1, 0.15, 0.1, 0.1], [0.1, 0.35, 0.1, 0.3, 0.1, 0.05]),
    ];
    let config = FusionConfig::default().with_weights(0.59, 0.88);

    for (name, a, v) in cases {
        let audio = prediction(Modality::Audio, a);
        let video = prediction(Modality::Video, v);
        println!("{name}: audio says {} ({:.2}), video says {} ({:.2})", audio.label, audio.confidence, video.label, video.confidence);
        for method in FusionMethod::ALL {
            let fused = fuse_pair(&audio, &video, &config.with_method(method))?;
            println!("  {:<22} {:<8} {:.3}  {:?}", method.id(), fused.label, fused.confidence, fused.provenance);
        }
        println!();
    }
    Ok(())
}
