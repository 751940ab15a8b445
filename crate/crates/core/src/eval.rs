//! Runs unimodal baselines and fusion methods over a manifest and scores them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fusion::{fuse, FusedPrediction, FusionConfig, FusionError, FusionMethod};
use crate::labels::{EmotionLabel, Modality, NUM_LABELS};
use crate::manifest::{ClipRecord, Manifest};
use crate::metrics::{ClassMetrics, ConfusionMatrix, MetricBundle, MetricsError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no methods requested")]
    NoMethods,
    #[error("no clip is eligible for method `{0}`")]
    NoEligibleClips(ReportMethod),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
}

/// A row of an evaluation report: a unimodal baseline or a fusion method.
///
/// `Ord` follows the fixed presentation order: audio, video, then the five
/// fusion methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportMethod {
    AudioOnly,
    VideoOnly,
    Fusion(FusionMethod),
}

impl ReportMethod {
    pub const ALL: [ReportMethod; 7] = [
        ReportMethod::AudioOnly,
        ReportMethod::VideoOnly,
        ReportMethod::Fusion(FusionMethod::Average),
        ReportMethod::Fusion(FusionMethod::WeightedAverage),
        ReportMethod::Fusion(FusionMethod::ConfidenceThreshold),
        ReportMethod::Fusion(FusionMethod::DynamicWeighting),
        ReportMethod::Fusion(FusionMethod::RuleBased),
    ];

    pub fn id(self) -> &'static str {
        match self {
            ReportMethod::AudioOnly => "audio_only",
            ReportMethod::VideoOnly => "video_only",
            ReportMethod::Fusion(m) => m.id(),
        }
    }

    /// Parses `all` or a comma-separated list of method ids.
    pub fn parse_list(list: &str) -> Result<BTreeSet<ReportMethod>, EvalError> {
        if list.trim() == "all" {
            return Ok(Self::ALL.into_iter().collect());
        }
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for ReportMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ReportMethod {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| EvalError::UnknownMethod(s.to_string()))
    }
}

impl Serialize for ReportMethod {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for ReportMethod {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Scores for one report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: ReportMethod,
    pub n_clips: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub per_class: Vec<ClassReport>,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: EmotionLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

impl MethodReport {
    fn new(method: ReportMethod, bundle: MetricBundle) -> Self {
        let per_class = EmotionLabel::ALL
            .iter()
            .zip(bundle.per_class.iter())
            .map(|(&label, c): (&EmotionLabel, &ClassMetrics)| ClassReport {
                label,
                precision: c.precision,
                recall: c.recall,
                f1: c.f1,
                support: c.support,
            })
            .collect();
        Self {
            method,
            n_clips: bundle.n,
            accuracy: bundle.accuracy,
            macro_f1: bundle.macro_f1,
            weighted_f1: bundle.weighted_f1,
            macro_precision: bundle.macro_precision,
            macro_recall: bundle.macro_recall,
            weighted_precision: bundle.weighted_precision,
            weighted_recall: bundle.weighted_recall,
            per_class,
            confusion: bundle.confusion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_method: Vec<MethodReport>,
    pub config_echo: FusionConfig,
    pub manifest_digest: String,
}

impl EvaluationReport {
    pub fn method(&self, method: ReportMethod) -> Option<&MethodReport> {
        self.per_method.iter().find(|r| r.method == method)
    }

    /// Accuracy of a row, panicking if it was not evaluated.
    pub fn accuracy(&self, method: ReportMethod) -> f64 {
        self.method(method)
            .unwrap_or_else(|| panic!("method `{method}` not in report"))
            .accuracy
    }
}

/// Fills missing weighted-average weights from the manifest's model metadata.
pub fn resolve_config(manifest: &Manifest, config: &FusionConfig) -> FusionConfig {
    FusionConfig {
        weight_audio: config.weight_audio.or(manifest.models.audio_accuracy()),
        weight_video: config.weight_video.or(manifest.models.video_accuracy()),
        ..*config
    }
}

fn predict(clip: &ClipRecord, method: ReportMethod, config: &FusionConfig) -> Result<Option<EmotionLabel>, FusionError> {
    match method {
        ReportMethod::AudioOnly => Ok(clip.prediction(Modality::Audio, config.tie_break).map(|p| p.label)),
        ReportMethod::VideoOnly => Ok(clip.prediction(Modality::Video, config.tie_break).map(|p| p.label)),
        ReportMethod::Fusion(m) if clip.has_both() => fuse(clip, &config.with_method(m)).map(|f| Some(f.label)),
        ReportMethod::Fusion(_) => Ok(None),
    }
}

/// Scores each requested method. Unimodal rows use every clip carrying that
/// modality; fusion rows use only clips carrying both.
pub fn evaluate(manifest: &Manifest, methods: &BTreeSet<ReportMethod>, config: &FusionConfig) -> Result<EvaluationReport, EvalError> {
    if methods.is_empty() {
        return Err(EvalError::NoMethods);
    }
    let config = resolve_config(manifest, config);
    config.validate()?;
    if methods.contains(&ReportMethod::Fusion(FusionMethod::WeightedAverage)) {
        config.weights()?;
    }

    let clips = manifest.sorted_clips();
    let mut per_method = Vec::with_capacity(methods.len());
    for &method in methods {
        let mut confusion = ConfusionMatrix::default();
        for clip in &clips {
            if let Some(pred) = predict(clip, method, &config)? {
                confusion.0[clip.ground_truth.index()][pred.index()] += 1;
            }
        }
        if confusion.total() == 0 {
            return Err(EvalError::NoEligibleClips(method));
        }
        per_method.push(MethodReport::new(method, MetricBundle::from_confusion(confusion)?));
    }
    Ok(EvaluationReport {
        per_method,
        config_echo: config,
        manifest_digest: manifest.digest(),
    })
}

/// One clip's fused decision, as emitted by the `fuse` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipDecision {
    pub clip_id: String,
    pub ground_truth: EmotionLabel,
    pub method: FusionMethod,
    pub label: EmotionLabel,
    pub confidence: f64,
    pub provenance: crate::fusion::Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fused_probs: Option<[f64; NUM_LABELS]>,
}

impl ClipDecision {
    fn new(clip: &ClipRecord, f: FusedPrediction) -> Self {
        Self {
            clip_id: clip.clip_id.clone(),
            ground_truth: clip.ground_truth,
            method: f.method,
            label: f.label,
            confidence: f.confidence,
            provenance: f.provenance,
            fused_probs: f.fused_probs.map(|p| *p.as_array()),
        }
    }
}

/// Fuses every two-modality clip with `config.method`, in clip_id order.
pub fn fuse_manifest(manifest: &Manifest, config: &FusionConfig) -> Result<Vec<ClipDecision>, EvalError> {
    let config = resolve_config(manifest, config);
    config.validate()?;
    let mut out = Vec::new();
    for clip in manifest.sorted_clips().into_iter().filter(|c| c.has_both()) {
        out.push(ClipDecision::new(clip, fuse(clip, &config)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{EmotionLabel::*, ProbabilityVector};
    use crate::manifest::{DatasetTag, ModelInfo, ModelsMeta};

    fn clip(id: &str, truth: EmotionLabel, audio: Option<EmotionLabel>, video: Option<EmotionLabel>) -> ClipRecord {
        let peaked = |l: EmotionLabel| {
            let mut raw = [0.04; NUM_LABELS];
            raw[l.index()] = 0.8;
            ProbabilityVector::ingest(raw).unwrap()
        };
        ClipRecord {
            clip_id: id.into(),
            dataset: DatasetTag::Synthetic,
            ground_truth: truth,
            audio: audio.map(peaked),
            video: video.map(peaked),
        }
    }

    fn models() -> ModelsMeta {
        ModelsMeta {
            audio: Some(ModelInfo {
                id: "a".into(),
                holdout_accuracy: Some(0.59),
            }),
            video: Some(ModelInfo {
                id: "v".into(),
                holdout_accuracy: Some(0.88),
            }),
        }
    }

    fn all() -> BTreeSet<ReportMethod> {
        ReportMethod::ALL.into_iter().collect()
    }

    #[test]
    fn perfect_video() {
        let clips = vec![
            clip("a", Anger, Some(Sad), Some(Anger)),
            clip("b", Happy, Some(Happy), Some(Happy)),
            clip("c", Neutral, None, Some(Neutral)),
        ];
        let m = Manifest::new(models(), clips);
        let r = evaluate(&m, &all(), &FusionConfig::default()).unwrap();
        assert_eq!(r.accuracy(ReportMethod::VideoOnly), 1.0);
        assert_eq!(r.method(ReportMethod::VideoOnly).unwrap().n_clips, 3);
        assert_eq!(r.method(ReportMethod::AudioOnly).unwrap().n_clips, 2);
        for m in FusionMethod::ALL {
            assert_eq!(r.method(ReportMethod::Fusion(m)).unwrap().n_clips, 2);
        }
        assert_eq!(r.config_echo.weight_video, Some(0.88));
        let order: Vec<_> = r.per_method.iter().map(|m| m.method).collect();
        assert_eq!(order, ReportMethod::ALL);
    }

    #[test]
    fn identical_modalities_collapse() {
        let labels = [Anger, Happy, Sad, Neutral, Fearful, Disgust];
        let clips = (0..12)
            .map(|i| {
                let pred = labels[(i * 5) % 6];
                clip(&format!("c{i:02}"), labels[i % 6], Some(pred), Some(pred))
            })
            .collect();
        let m = Manifest::new(models(), clips);
        let r = evaluate(&m, &all(), &FusionConfig::default()).unwrap();
        let audio = r.accuracy(ReportMethod::AudioOnly);
        for f in FusionMethod::ALL {
            assert_eq!(r.accuracy(ReportMethod::Fusion(f)), audio, "{f}");
        }
    }

    #[test]
    fn five_clip_hand_case() {
        let truths = [Anger, Anger, Happy, Sad, Neutral];
        let preds = [Anger, Happy, Happy, Sad, Sad];
        let clips = truths
            .iter()
            .zip(preds)
            .enumerate()
            .map(|(i, (&t, p))| clip(&format!("c{i}"), t, Some(p), None))
            .collect();
        let m = Manifest::new(ModelsMeta::default(), clips);
        let methods = [ReportMethod::AudioOnly].into_iter().collect();
        let r = evaluate(&m, &methods, &FusionConfig::default()).unwrap();
        let row = r.method(ReportMethod::AudioOnly).unwrap();
        assert_eq!(row.accuracy, 0.6);
        assert!((row.macro_f1 - 0.5).abs() < 1e-15);
        assert_eq!(row.confusion.trace() as f64 / row.n_clips as f64, row.accuracy);
    }

    #[test]
    fn error_paths() {
        let m = Manifest::new(ModelsMeta::default(), vec![clip("a", Anger, Some(Anger), None)]);
        assert!(matches!(evaluate(&m, &BTreeSet::new(), &FusionConfig::default()), Err(EvalError::NoMethods)));
        let avg = [ReportMethod::Fusion(FusionMethod::Average)].into_iter().collect();
        assert!(matches!(
            evaluate(&m, &avg, &FusionConfig::default()),
            Err(EvalError::NoEligibleClips(ReportMethod::Fusion(FusionMethod::Average)))
        ));
        let wa = [ReportMethod::Fusion(FusionMethod::WeightedAverage)].into_iter().collect();
        assert!(matches!(
            evaluate(&m, &wa, &FusionConfig::default()),
            Err(EvalError::Fusion(FusionError::MissingWeights(_)))
        ));
    }

    #[test]
    fn method_lists() {
        assert_eq!(ReportMethod::parse_list("all").unwrap().len(), 7);
        let l = ReportMethod::parse_list("rule_based, audio_only").unwrap();
        assert_eq!(l.into_iter().collect::<Vec<_>>(), [ReportMethod::AudioOnly, ReportMethod::Fusion(FusionMethod::RuleBased)]);
        assert!(ReportMethod::parse_list("average,bogus").is_err());
    }

    #[test]
    fn fuse_manifest_skips_single_modality() {
        let m = Manifest::new(
            models(),
            vec![clip("b", Anger, Some(Anger), Some(Sad)), clip("a", Sad, None, Some(Sad))],
        );
        let d = fuse_manifest(&m, &FusionConfig::default().with_method(FusionMethod::RuleBased)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].clip_id, "b");
        assert!(d[0].fused_probs.is_none());
    }
}
