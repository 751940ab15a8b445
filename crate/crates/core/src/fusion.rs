//! Late-fusion decision methods over one audio and one video prediction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{argmax_label, EmotionLabel, Modality, ModalityPrediction, ProbabilityVector, TieBreakPolicy, NUM_LABELS};
use crate::manifest::ClipRecord;

pub const DEFAULT_VIDEO_THRESHOLD: f64 = 0.7;
pub const DEFAULT_AGREEMENT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("fusion weight must be strictly positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("confidence must be strictly positive for dynamic weighting")]
    ZeroConfidence,
    #[error("threshold `{name}` must lie in [0, 1], got {value}")]
    ThresholdOutOfRange { name: &'static str, value: f64 },
    #[error("weighted average needs both model weights; missing: {0}")]
    MissingWeights(String),
    #[error("clip `{clip_id}` has no {modality} prediction")]
    MissingModality { clip_id: String, modality: Modality },
    #[error("unknown fusion method `{0}`")]
    UnknownMethod(String),
}

/// The five decision methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMethod {
    Average,
    WeightedAverage,
    ConfidenceThreshold,
    DynamicWeighting,
    RuleBased,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 5] = [
        FusionMethod::Average,
        FusionMethod::WeightedAverage,
        FusionMethod::ConfidenceThreshold,
        FusionMethod::DynamicWeighting,
        FusionMethod::RuleBased,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FusionMethod::Average => "average",
            FusionMethod::WeightedAverage => "weighted_average",
            FusionMethod::ConfidenceThreshold => "confidence_threshold",
            FusionMethod::DynamicWeighting => "dynamic_weighting",
            FusionMethod::RuleBased => "rule_based",
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FusionMethod {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.id() == s)
            .ok_or_else(|| FusionError::UnknownMethod(s.to_string()))
    }
}

/// How per-modality confidences turn into dynamic weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicMode {
    /// Weight each modality by the reciprocal of its confidence.
    #[default]
    InverseConfidence,
    /// Weight each modality by its confidence.
    ProportionalConfidence,
}

impl FromStr for DynamicMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inverse_confidence" | "inverse" => Ok(DynamicMode::InverseConfidence),
            "proportional_confidence" | "proportional" => Ok(DynamicMode::ProportionalConfidence),
            other => Err(format!("unknown dynamic mode `{other}`")),
        }
    }
}

/// Where a fused label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Blended,
    AudioSelected,
    VideoSelected,
    Agreed,
}

/// Parameters for all five methods.
///
/// `weight_audio`/`weight_video` are only consulted by the weighted average;
/// callers usually fill them from the models' holdout accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub method: FusionMethod,
    pub video_conf_threshold: f64,
    pub agreement_threshold: f64,
    pub weight_audio: Option<f64>,
    pub weight_video: Option<f64>,
    pub dynamic_mode: DynamicMode,
    pub tie_break: TieBreakPolicy,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            method: FusionMethod::Average,
            video_conf_threshold: DEFAULT_VIDEO_THRESHOLD,
            agreement_threshold: DEFAULT_AGREEMENT_THRESHOLD,
            weight_audio: None,
            weight_video: None,
            dynamic_mode: DynamicMode::default(),
            tie_break: TieBreakPolicy::default(),
        }
    }
}

impl FusionConfig {
    pub fn with_method(self, method: FusionMethod) -> Self {
        Self { method, ..self }
    }

    pub fn with_weights(self, audio: f64, video: f64) -> Self {
        Self {
            weight_audio: Some(audio),
            weight_video: Some(video),
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        for (name, value) in [
            ("video_conf_threshold", self.video_conf_threshold),
            ("agreement_threshold", self.agreement_threshold),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(FusionError::ThresholdOutOfRange { name, value });
            }
        }
        for w in [self.weight_audio, self.weight_video].into_iter().flatten() {
            check_weight(w)?;
        }
        Ok(())
    }

    /// Both weights, or an error naming the missing ones.
    pub fn weights(&self) -> Result<(f64, f64), FusionError> {
        match (self.weight_audio, self.weight_video) {
            (Some(a), Some(v)) => Ok((a, v)),
            (a, v) => {
                let missing: Vec<&str> = [(a, "weight_audio"), (v, "weight_video")]
                    .into_iter()
                    .filter(|(w, _)| w.is_none())
                    .map(|(_, name)| name)
                    .collect();
                Err(FusionError::MissingWeights(missing.join(", ")))
            }
        }
    }
}

fn check_weight(w: f64) -> Result<(), FusionError> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(FusionError::NonPositiveWeight(w))
    }
}

/// Final decision for one clip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedPrediction {
    pub label: EmotionLabel,
    pub confidence: f64,
    /// Absent for methods that select one modality's label.
    pub fused_probs: Option<ProbabilityVector>,
    pub method: FusionMethod,
    pub provenance: Provenance,
}

fn blend(audio: &ProbabilityVector, video: &ProbabilityVector, w_audio: f64, w_video: f64) -> ProbabilityVector {
    let (a, v) = (audio.as_array(), video.as_array());
    let mut out = [0.0; NUM_LABELS];
    for i in 0..NUM_LABELS {
        out[i] = w_audio * a[i] + w_video * v[i];
    }
    ProbabilityVector::from_convex(out)
}

fn blended(probs: ProbabilityVector, method: FusionMethod, tie_break: TieBreakPolicy) -> FusedPrediction {
    let (label, confidence) = argmax_label(&probs, tie_break);
    FusedPrediction {
        label,
        confidence,
        fused_probs: Some(probs),
        method,
        provenance: Provenance::Blended,
    }
}

fn selected(pred: &ModalityPrediction, method: FusionMethod, provenance: Provenance) -> FusedPrediction {
    FusedPrediction {
        label: pred.label,
        confidence: pred.confidence,
        fused_probs: None,
        method,
        provenance,
    }
}

/// Component-wise mean of the two distributions.
pub fn fuse_average(audio: &ProbabilityVector, video: &ProbabilityVector, tie_break: TieBreakPolicy) -> FusedPrediction {
    let (a, v) = (audio.as_array(), video.as_array());
    let mut out = [0.0; NUM_LABELS];
    for i in 0..NUM_LABELS {
        out[i] = (a[i] + v[i]) / 2.0;
    }
    blended(ProbabilityVector::from_convex(out), FusionMethod::Average, tie_break)
}

/// Mean weighted by per-model weights (typically holdout accuracies),
/// renormalized by their sum.
pub fn fuse_weighted_average(
    audio: &ProbabilityVector,
    video: &ProbabilityVector,
    w_audio: f64,
    w_video: f64,
    tie_break: TieBreakPolicy,
) -> Result<FusedPrediction, FusionError> {
    check_weight(w_audio)?;
    check_weight(w_video)?;
    let total = w_audio + w_video;
    let (a, v) = (audio.as_array(), video.as_array());
    let mut out = [0.0; NUM_LABELS];
    for i in 0..NUM_LABELS {
        out[i] = (w_audio * a[i] + w_video * v[i]) / total;
    }
    Ok(blended(ProbabilityVector::from_convex(out), FusionMethod::WeightedAverage, tie_break))
}

/// Trusts the video prediction when its confidence is strictly above
/// `threshold`, otherwise falls back to the plain average.
pub fn fuse_confidence_threshold(
    audio: &ModalityPrediction,
    video: &ModalityPrediction,
    threshold: f64,
    tie_break: TieBreakPolicy,
) -> FusedPrediction {
    if video.confidence > threshold {
        return selected(video, FusionMethod::ConfidenceThreshold, Provenance::VideoSelected);
    }
    FusedPrediction {
        method: FusionMethod::ConfidenceThreshold,
        ..fuse_average(&audio.probs, &video.probs, tie_break)
    }
}

/// Per-modality weights derived from the two confidences; they sum to 1.
pub fn dynamic_weights(conf_audio: f64, conf_video: f64, mode: DynamicMode) -> Result<(f64, f64), FusionError> {
    if !(conf_audio > 0.0 && conf_video > 0.0) {
        return Err(FusionError::ZeroConfidence);
    }
    let (raw_a, raw_v) = match mode {
        DynamicMode::InverseConfidence => (1.0 / conf_audio, 1.0 / conf_video),
        DynamicMode::ProportionalConfidence => (conf_audio, conf_video),
    };
    let total = raw_a + raw_v;
    Ok((raw_a / total, raw_v / total))
}

/// Blends the two distributions with weights computed from each modality's
/// confidence (its maximum component).
pub fn fuse_dynamic_weighting(
    audio: &ModalityPrediction,
    video: &ModalityPrediction,
    mode: DynamicMode,
    tie_break: TieBreakPolicy,
) -> Result<FusedPrediction, FusionError> {
    let (w_a, w_v) = dynamic_weights(audio.confidence, video.confidence, mode)?;
    Ok(blended(
        blend(&audio.probs, &video.probs, w_a, w_v),
        FusionMethod::DynamicWeighting,
        tie_break,
    ))
}

/// Returns the shared label when both modalities agree with confidence
/// strictly above `agreement_threshold`; otherwise the label of the more
/// confident modality, video winning exact ties.
pub fn fuse_rule_based(audio: &ModalityPrediction, video: &ModalityPrediction, agreement_threshold: f64) -> FusedPrediction {
    if audio.label == video.label && audio.confidence > agreement_threshold && video.confidence > agreement_threshold {
        return FusedPrediction {
            label: audio.label,
            confidence: audio.confidence.max(video.confidence),
            fused_probs: None,
            method: FusionMethod::RuleBased,
            provenance: Provenance::Agreed,
        };
    }
    if audio.confidence > video.confidence {
        selected(audio, FusionMethod::RuleBased, Provenance::AudioSelected)
    } else {
        selected(video, FusionMethod::RuleBased, Provenance::VideoSelected)
    }
}

/// Runs the configured method on a pair of modality predictions.
pub fn fuse_pair(audio: &ModalityPrediction, video: &ModalityPrediction, config: &FusionConfig) -> Result<FusedPrediction, FusionError> {
    let tb = config.tie_break;
    match config.method {
        FusionMethod::Average => Ok(fuse_average(&audio.probs, &video.probs, tb)),
        FusionMethod::WeightedAverage => {
            let (w_a, w_v) = config.weights()?;
            fuse_weighted_average(&audio.probs, &video.probs, w_a, w_v, tb)
        }
        FusionMethod::ConfidenceThreshold => Ok(fuse_confidence_threshold(audio, video, config.video_conf_threshold, tb)),
        FusionMethod::DynamicWeighting => fuse_dynamic_weighting(audio, video, config.dynamic_mode, tb),
        FusionMethod::RuleBased => Ok(fuse_rule_based(audio, video, config.agreement_threshold)),
    }
}

/// Fuses a clip's two modality vectors with the configured method.
pub fn fuse(clip: &ClipRecord, config: &FusionConfig) -> Result<FusedPrediction, FusionError> {
    let missing = |modality| FusionError::MissingModality {
        clip_id: clip.clip_id.clone(),
        modality,
    };
    let audio = clip
        .prediction(Modality::Audio, config.tie_break)
        .ok_or_else(|| missing(Modality::Audio))?;
    let video = clip
        .prediction(Modality::Video, config.tie_break)
        .ok_or_else(|| missing(Modality::Video))?;
    fuse_pair(&audio, &video, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::EmotionLabel::*;

    const TB: TieBreakPolicy = TieBreakPolicy::LowestIndex;

    fn pv(entries: &[(EmotionLabel, f64)]) -> ProbabilityVector {
        let mut raw = [0.0; NUM_LABELS];
        for &(l, p) in entries {
            raw[l.index()] = p;
        }
        ProbabilityVector::ingest(raw).unwrap()
    }

    fn pred(m: Modality, entries: &[(EmotionLabel, f64)]) -> ModalityPrediction {
        ModalityPrediction::new(m, pv(entries), TB)
    }

    #[test]
    fn average_examples() {
        let f = fuse_average(&pv(&[(Anger, 0.6), (Happy, 0.4)]), &pv(&[(Anger, 0.2), (Happy, 0.8)]), TB);
        let probs = f.fused_probs.unwrap();
        assert!((probs.get(Anger) - 0.4).abs() < 1e-12);
        assert!((probs.get(Happy) - 0.6).abs() < 1e-12);
        assert_eq!(f.label, Happy);
        assert!((f.confidence - 0.6).abs() < 1e-12);
        assert_eq!(f.provenance, Provenance::Blended);

        let p = pv(&[(Sad, 0.3), (Fearful, 0.7)]);
        let f = fuse_average(&p, &p, TB);
        assert_eq!(f.fused_probs.unwrap(), p);
        assert_eq!(f.label, Fearful);

        let f = fuse_average(&ProbabilityVector::uniform(), &ProbabilityVector::one_hot(Happy), TB);
        let probs = f.fused_probs.unwrap();
        assert!((probs.get(Happy) - 0.583333).abs() < 1e-6);
        assert!((probs.get(Anger) - 0.083333).abs() < 1e-6);
        assert_eq!(f.label, Happy);
    }

    #[test]
    fn weighted_average_examples() {
        let a = ProbabilityVector::one_hot(Anger);
        let v = ProbabilityVector::one_hot(Happy);
        let f = fuse_weighted_average(&a, &v, 0.59, 0.88, TB).unwrap();
        let probs = f.fused_probs.unwrap();
        assert!((probs.get(Anger) - 0.401361).abs() < 1e-6);
        assert!((probs.get(Happy) - 0.598639).abs() < 1e-6);
        assert_eq!(f.label, Happy);

        let a = pv(&[(Anger, 0.6), (Happy, 0.4)]);
        let v = pv(&[(Anger, 0.2), (Happy, 0.8)]);
        let w = fuse_weighted_average(&a, &v, 0.3, 0.3, TB).unwrap();
        let m = fuse_average(&a, &v, TB);
        assert_eq!(w.label, m.label);
        for l in EmotionLabel::ALL {
            assert!((w.fused_probs.unwrap().get(l) - m.fused_probs.unwrap().get(l)).abs() < 1e-15);
        }

        let v = pv(&[(Sad, 0.4), (Neutral, 0.35), (Anger, 0.25)]);
        let f = fuse_weighted_average(&ProbabilityVector::one_hot(Anger), &v, 1e-9, 1.0, TB).unwrap();
        assert_eq!(f.label, Sad);

        assert_eq!(
            fuse_weighted_average(&a, &v, 0.0, 1.0, TB),
            Err(FusionError::NonPositiveWeight(0.0))
        );
        assert!(fuse_weighted_average(&a, &v, 1.0, -2.0, TB).is_err());
    }

    #[test]
    fn confidence_threshold_examples() {
        let audio = pred(Modality::Audio, &[(Happy, 1.0)]);
        let video = pred(Modality::Video, &[(Sad, 0.75), (Anger, 0.25)]);
        let f = fuse_confidence_threshold(&audio, &video, 0.7, TB);
        assert_eq!((f.label, f.provenance), (Sad, Provenance::VideoSelected));
        assert!(f.fused_probs.is_none());
        assert_eq!(f.confidence, 0.75);

        // Exactly at the threshold falls through to averaging.
        let video = pred(Modality::Video, &[(Sad, 0.7), (Anger, 0.3)]);
        let f = fuse_confidence_threshold(&audio, &video, 0.7, TB);
        assert_eq!(f.provenance, Provenance::Blended);
        assert_eq!(f.method, FusionMethod::ConfidenceThreshold);

        let audio = pred(Modality::Audio, &[(Anger, 0.9), (Disgust, 0.1)]);
        let video = pred(Modality::Video, &[(Anger, 0.5), (Neutral, 0.5)]);
        let f = fuse_confidence_threshold(&audio, &video, 0.7, TB);
        assert_eq!(f.label, Anger);
        assert!((f.fused_probs.unwrap().get(Anger) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn dynamic_weighting_examples() {
        let audio = pred(Modality::Audio, &[(Anger, 0.8), (Sad, 0.2)]);
        let video = pred(Modality::Video, &[(Happy, 0.5), (Sad, 0.5)]);

        let (w_a, w_v) = dynamic_weights(0.8, 0.5, DynamicMode::InverseConfidence).unwrap();
        assert!((w_a - 1.25 / 3.25).abs() < 1e-12);
        assert!((w_v - 2.0 / 3.25).abs() < 1e-12);
        let f = fuse_dynamic_weighting(&audio, &video, DynamicMode::InverseConfidence, TB).unwrap();
        let probs = f.fused_probs.unwrap();
        assert!((probs.get(Anger) - 0.307692).abs() < 1e-6);
        assert!((probs.get(Happy) - 0.307692).abs() < 1e-6);
        assert!((probs.get(Sad) - 0.384615).abs() < 1e-6);
        assert_eq!(f.label, Sad);

        let f = fuse_dynamic_weighting(&audio, &video, DynamicMode::ProportionalConfidence, TB).unwrap();
        assert!((f.fused_probs.unwrap().get(Anger) - 0.492308).abs() < 1e-6);
        assert_eq!(f.label, Anger);

        let a = pred(Modality::Audio, &[(Anger, 0.6), (Happy, 0.4)]);
        let v = pred(Modality::Video, &[(Happy, 0.6), (Sad, 0.4)]);
        for mode in [DynamicMode::InverseConfidence, DynamicMode::ProportionalConfidence] {
            let f = fuse_dynamic_weighting(&a, &v, mode, TB).unwrap();
            assert_eq!(f.fused_probs, fuse_average(&a.probs, &v.probs, TB).fused_probs);
        }

        assert_eq!(dynamic_weights(0.0, 0.5, DynamicMode::InverseConfidence), Err(FusionError::ZeroConfidence));
    }

    #[test]
    fn rule_based_examples() {
        let f = fuse_rule_based(&pred(Modality::Audio, &[(Happy, 0.6), (Sad, 0.4)]), &pred(Modality::Video, &[(Happy, 0.7), (Sad, 0.3)]), 0.5);
        assert_eq!((f.label, f.provenance), (Happy, Provenance::Agreed));
        assert_eq!(f.confidence, 0.7);

        let f = fuse_rule_based(&pred(Modality::Audio, &[(Anger, 0.9), (Sad, 0.1)]), &pred(Modality::Video, &[(Happy, 0.6), (Sad, 0.4)]), 0.5);
        assert_eq!((f.label, f.provenance), (Anger, Provenance::AudioSelected));

        let audio = pred(Modality::Audio, &[(Happy, 0.45), (Sad, 0.35), (Anger, 0.2)]);
        let video = pred(Modality::Video, &[(Happy, 0.7), (Sad, 0.3)]);
        let f = fuse_rule_based(&audio, &video, 0.5);
        assert_eq!((f.label, f.provenance), (Happy, Provenance::VideoSelected));

        // Equal confidence, different labels: video wins.
        let f = fuse_rule_based(&pred(Modality::Audio, &[(Anger, 0.6), (Sad, 0.4)]), &pred(Modality::Video, &[(Happy, 0.6), (Sad, 0.4)]), 0.5);
        assert_eq!((f.label, f.provenance), (Happy, Provenance::VideoSelected));
    }

    #[test]
    fn dispatch() {
        let audio = pred(Modality::Audio, &[(Anger, 0.8), (Sad, 0.2)]);
        let video = pred(Modality::Video, &[(Happy, 0.5), (Sad, 0.5)]);
        let config = FusionConfig::default();
        assert_eq!(fuse_pair(&audio, &video, &config).unwrap(), fuse_average(&audio.probs, &video.probs, TB));
        assert_eq!(
            fuse_pair(&audio, &video, &config.with_method(FusionMethod::RuleBased)).unwrap(),
            fuse_rule_based(&audio, &video, 0.5)
        );
        assert_eq!(
            fuse_pair(&audio, &video, &config.with_method(FusionMethod::WeightedAverage)),
            Err(FusionError::MissingWeights("weight_audio, weight_video".into()))
        );
        let c = config.with_method(FusionMethod::WeightedAverage).with_weights(0.59, 0.88);
        assert_eq!(
            fuse_pair(&audio, &video, &c).unwrap(),
            fuse_weighted_average(&audio.probs, &video.probs, 0.59, 0.88, TB).unwrap()
        );
    }

    #[test]
    fn fuse_clip_requires_both_modalities() {
        use crate::manifest::DatasetTag;
        let mut clip = ClipRecord {
            clip_id: "c".into(),
            dataset: DatasetTag::Synthetic,
            ground_truth: Happy,
            audio: Some(pv(&[(Happy, 0.9), (Sad, 0.1)])),
            video: None,
        };
        assert_eq!(
            fuse(&clip, &FusionConfig::default()),
            Err(FusionError::MissingModality {
                clip_id: "c".into(),
                modality: Modality::Video
            })
        );
        clip.video = Some(pv(&[(Sad, 0.6), (Happy, 0.4)]));
        let f = fuse(&clip, &FusionConfig::default()).unwrap();
        assert_eq!(f, fuse_average(&clip.audio.unwrap(), &clip.video.unwrap(), TB));
    }

    #[test]
    fn config_validation() {
        assert!(FusionConfig::default().validate().is_ok());
        let bad = FusionConfig {
            video_conf_threshold: 1.2,
            ..FusionConfig::default()
        };
        assert!(matches!(bad.validate(), Err(FusionError::ThresholdOutOfRange { .. })));
        assert!(FusionConfig::default().with_weights(0.0, 1.0).validate().is_err());
        assert_eq!("rule_based".parse::<FusionMethod>().unwrap(), FusionMethod::RuleBased);
        assert!("vote".parse::<FusionMethod>().is_err());
    }
}
