use emofuse::eval::ReportMethod;
use emofuse::labels::NUM_LABELS;
use emofuse::report::{parse_json_report, render_report, ReportFormat};
use emofuse::{
    evaluate, fuse_average, fuse_pair, fuse_rule_based, generate_manifest, ClipRecord, DatasetTag, DynamicMode, EmotionLabel,
    FusionConfig, FusionMethod, Manifest, Modality, ModalityPrediction, ModelsMeta, ProbabilityVector, SynthParams,
    TieBreakPolicy,
};
use proptest::prelude::*;

const TB: TieBreakPolicy = TieBreakPolicy::LowestIndex;

fn prob_vec() -> impl Strategy<Value = ProbabilityVector> {
    prop::array::uniform6(0.0f64..1.0)
        .prop_filter("some mass", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(|raw| ProbabilityVector::normalize(raw).unwrap())
}

fn perm6() -> impl Strategy<Value = [usize; 6]> {
    Just([0usize, 1, 2, 3, 4, 5]).prop_shuffle()
}

fn unique_max(p: &ProbabilityVector) -> bool {
    let m = p.max();
    p.as_array().iter().filter(|&&x| x == m).count() == 1
}

fn config_for(method: FusionMethod) -> FusionConfig {
    FusionConfig::default().with_method(method).with_weights(0.59, 0.88)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn permutation_equivariance(a in prob_vec(), v in prob_vec(), perm in perm6()) {
        let audio = ModalityPrediction::new(Modality::Audio, a, TB);
        let video = ModalityPrediction::new(Modality::Video, v, TB);
        let pa = ModalityPrediction::new(Modality::Audio, a.permuted(&perm), TB);
        let pv = ModalityPrediction::new(Modality::Video, v.permuted(&perm), TB);
        prop_assume!(unique_max(&a) && unique_max(&v));
        prop_assume!(video.confidence != 0.7 && audio.confidence != 0.5 && video.confidence != 0.5);
        prop_assume!(audio.confidence != video.confidence);
        for method in FusionMethod::ALL {
            let config = config_for(method);
            let base = fuse_pair(&audio, &video, &config).unwrap();
            if let Some(p) = base.fused_probs {
                prop_assume!(unique_max(&p));
            }
            let permuted = fuse_pair(&pa, &pv, &config).unwrap();
            prop_assert_eq!(permuted.label.index(), perm[base.label.index()], "{}", method);
        }
    }

    #[test]
    fn dominance(a in prob_vec(), v in prob_vec()) {
        let audio = ModalityPrediction::new(Modality::Audio, a, TB);
        let video = ModalityPrediction::new(Modality::Video, v, TB);
        for method in [FusionMethod::Average, FusionMethod::WeightedAverage, FusionMethod::DynamicWeighting] {
            for mode in [DynamicMode::InverseConfidence, DynamicMode::ProportionalConfidence] {
                let config = FusionConfig { dynamic_mode: mode, ..config_for(method) };
                let fused = fuse_pair(&audio, &video, &config).unwrap().fused_probs.unwrap();
                for i in 0..NUM_LABELS {
                    for j in 0..NUM_LABELS {
                        if a.as_array()[i] >= a.as_array()[j] && v.as_array()[i] >= v.as_array()[j] {
                            prop_assert!(fused.as_array()[i] >= fused.as_array()[j]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rule_based_keeps_agreement(a in prob_vec(), v in prob_vec(), threshold in 0.0f64..=1.0) {
        let audio = ModalityPrediction::new(Modality::Audio, a, TB);
        let video = ModalityPrediction::new(Modality::Video, v, TB);
        if audio.label == video.label {
            prop_assert_eq!(fuse_rule_based(&audio, &video, threshold).label, audio.label);
        }
    }

    #[test]
    fn average_symmetric(a in prob_vec(), v in prob_vec()) {
        prop_assert_eq!(fuse_average(&a, &v, TB).fused_probs, fuse_average(&v, &a, TB).fused_probs);
    }

    #[test]
    fn report_invariants(seed in any::<u64>(), n in 1usize..60, drop_every in 2usize..7) {
        let mut manifest = generate_manifest(&SynthParams::new(n, 0.6, 0.75, seed)).unwrap();
        for (i, clip) in manifest.clips.iter_mut().enumerate() {
            if i % drop_every == 0 {
                clip.video = None;
            }
        }
        let both = manifest.clips.iter().filter(|c| c.has_both()).count() as u64;
        let methods = ReportMethod::ALL.into_iter().collect();
        match evaluate(&manifest, &methods, &FusionConfig::default()) {
            Ok(report) => {
                for row in &report.per_method {
                    prop_assert_eq!(row.confusion.total(), row.n_clips);
                    prop_assert_eq!(row.accuracy, row.confusion.trace() as f64 / row.n_clips as f64);
                    if let ReportMethod::Fusion(_) = row.method {
                        prop_assert_eq!(row.n_clips, both);
                    }
                }
                let json = render_report(&report, ReportFormat::Json);
                let again = render_report(&parse_json_report(&json).unwrap(), ReportFormat::Json);
                prop_assert_eq!(json, again);
            }
            Err(e) => prop_assert!(both == 0, "{e}"),
        }
    }

    #[test]
    fn generated_vectors_validate(seed in any::<u64>(), acc_a in 0.05f64..0.95, acc_v in 0.05f64..0.95) {
        let m = generate_manifest(&SynthParams::new(50, acc_a, acc_v, seed)).unwrap();
        let reloaded = Manifest::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(reloaded.digest(), m.digest());
    }
}

#[test]
fn clip_order_does_not_change_report() {
    let m = generate_manifest(&SynthParams::new(120, 0.65, 0.8, 5)).unwrap();
    let mut reversed = m.clone();
    reversed.clips.reverse();
    let methods = ReportMethod::ALL.into_iter().collect();
    let a = evaluate(&m, &methods, &FusionConfig::default()).unwrap();
    let b = evaluate(&reversed, &methods, &FusionConfig::default()).unwrap();
    assert_eq!(a.per_method, b.per_method);
}

#[test]
fn threshold_method_follows_confident_video() {
    // Acceptance runs 10,000 seeded pairs; this variant sweeps thresholds.
    let m = generate_manifest(&SynthParams::new(2000, 0.5, 0.5, 9)).unwrap();
    for threshold in [0.0, 0.55, 0.7, 0.9] {
        let config = FusionConfig {
            video_conf_threshold: threshold,
            ..FusionConfig::default().with_method(FusionMethod::ConfidenceThreshold)
        };
        for clip in &m.clips {
            let video = clip.prediction(Modality::Video, TB).unwrap();
            let f = emofuse::fuse(clip, &config).unwrap();
            if video.confidence > threshold {
                assert_eq!(f.label, video.label);
            }
        }
    }
}

#[test]
fn identical_modalities_make_fusion_collapse() {
    let base = generate_manifest(&SynthParams::new(300, 0.6, 0.6, 13)).unwrap();
    let clips: Vec<ClipRecord> = base
        .clips
        .iter()
        .map(|c| ClipRecord {
            video: c.audio,
            ..c.clone()
        })
        .collect();
    let m = Manifest::new(ModelsMeta::default(), clips);
    let config = FusionConfig::default().with_weights(0.3, 0.7);
    let r = evaluate(&m, &ReportMethod::ALL.into_iter().collect(), &config).unwrap();
    let audio = r.accuracy(ReportMethod::AudioOnly);
    for method in FusionMethod::ALL {
        assert_eq!(r.accuracy(ReportMethod::Fusion(method)), audio, "{method}");
    }
    assert!(m.clips.iter().all(|c| c.dataset == DatasetTag::Synthetic));
    assert_eq!(EmotionLabel::ALL.len(), NUM_LABELS);
}
