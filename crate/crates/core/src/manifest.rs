//! Probability manifests: the JSON interchange between inference and
//! evaluation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::labels::{EmotionLabel, LabelError, Modality, ModalityPrediction, ProbabilityVector, TieBreakPolicy};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest schema error: {0}")]
    Schema(String),
    #[error("manifest validation error: {0}")]
    Validation(String),
}

impl ManifestError {
    /// True for errors in the data itself rather than in reading or decoding it.
    pub fn is_validation(&self) -> bool {
        matches!(self, ManifestError::Validation(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetTag {
    Ravdess,
    CremaD,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelsMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio: Option<ModelInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<ModelInfo>,
}

impl ModelsMeta {
    pub fn audio_accuracy(&self) -> Option<f64> {
        self.audio.as_ref().and_then(|m| m.holdout_accuracy)
    }

    pub fn video_accuracy(&self) -> Option<f64> {
        self.video.as_ref().and_then(|m| m.holdout_accuracy)
    }
}

/// One media clip with its ground truth and per-modality outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRecord {
    pub clip_id: String,
    pub dataset: DatasetTag,
    pub ground_truth: EmotionLabel,
    pub audio: Option<ProbabilityVector>,
    pub video: Option<ProbabilityVector>,
}

impl ClipRecord {
    pub fn prediction(&self, modality: Modality, tie_break: TieBreakPolicy) -> Option<ModalityPrediction> {
        let probs = match modality {
            Modality::Audio => self.audio?,
            Modality::Video => self.video?,
        };
        Some(ModalityPrediction::new(modality, probs, tie_break))
    }

    pub fn has_both(&self) -> bool {
        self.audio.is_some() && self.video.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub schema_version: String,
    pub models: ModelsMeta,
    pub clips: Vec<ClipRecord>,
}

// Wire format. Kept separate from the validated types above.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbsWire {
    anger: f64,
    disgust: f64,
    fearful: f64,
    happy: f64,
    neutral: f64,
    sad: f64,
}

impl ProbsWire {
    fn to_array(&self) -> [f64; 6] {
        [self.anger, self.disgust, self.fearful, self.happy, self.neutral, self.sad]
    }

    fn from_vector(p: &ProbabilityVector) -> Self {
        let [anger, disgust, fearful, happy, neutral, sad] = *p.as_array();
        Self {
            anger,
            disgust,
            fearful,
            happy,
            neutral,
            sad,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModalityWire {
    probs: ProbsWire,
}

#[derive(Serialize, Deserialize)]
struct ClipWire {
    clip_id: String,
    dataset: DatasetTag,
    ground_truth: EmotionLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audio: Option<ModalityWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    video: Option<ModalityWire>,
}

#[derive(Serialize, Deserialize)]
struct ManifestWire {
    schema_version: String,
    #[serde(default)]
    models: ModelsMeta,
    clips: Vec<ClipWire>,
}

fn ingest(clip_id: &str, modality: &str, wire: Option<ModalityWire>) -> Result<Option<ProbabilityVector>, ManifestError> {
    wire.map(|m| {
        ProbabilityVector::ingest(m.probs.to_array())
            .map_err(|e: LabelError| ManifestError::Validation(format!("clip `{clip_id}` {modality} probs: {e}")))
    })
    .transpose()
}

impl Manifest {
    pub fn new(models: ModelsMeta, clips: Vec<ClipRecord>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            models,
            clips,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let wire: ManifestWire = serde_json::from_str(text).map_err(|e| ManifestError::Schema(e.to_string()))?;
        if wire.schema_version != SCHEMA_VERSION {
            return Err(ManifestError::Schema(format!(
                "unsupported schema_version `{}` (expected `{SCHEMA_VERSION}`)",
                wire.schema_version
            )));
        }
        for (role, info) in [("audio", &wire.models.audio), ("video", &wire.models.video)] {
            if let Some(acc) = info.as_ref().and_then(|m| m.holdout_accuracy) {
                if !(acc.is_finite() && acc > 0.0 && acc <= 1.0) {
                    return Err(ManifestError::Validation(format!("{role} holdout_accuracy {acc} outside (0, 1]")));
                }
            }
        }
        let mut seen = HashSet::new();
        let mut clips = Vec::with_capacity(wire.clips.len());
        for c in wire.clips {
            if !seen.insert(c.clip_id.clone()) {
                return Err(ManifestError::Validation(format!("duplicate clip_id `{}`", c.clip_id)));
            }
            let audio = ingest(&c.clip_id, "audio", c.audio)?;
            let video = ingest(&c.clip_id, "video", c.video)?;
            clips.push(ClipRecord {
                clip_id: c.clip_id,
                dataset: c.dataset,
                ground_truth: c.ground_truth,
                audio,
                video,
            });
        }
        Ok(Self {
            schema_version: wire.schema_version,
            models: wire.models,
            clips,
        })
    }

    /// Serializes to the manifest schema. Output is deterministic.
    pub fn to_json(&self) -> String {
        let wire = ManifestWire {
            schema_version: self.schema_version.clone(),
            models: self.models.clone(),
            clips: self
                .clips
                .iter()
                .map(|c| ClipWire {
                    clip_id: c.clip_id.clone(),
                    dataset: c.dataset,
                    ground_truth: c.ground_truth,
                    audio: c.audio.as_ref().map(|p| ModalityWire { probs: ProbsWire::from_vector(p) }),
                    video: c.video.as_ref().map(|p| ModalityWire { probs: ProbsWire::from_vector(p) }),
                })
                .collect(),
        };
        serde_json::to_string(&wire).expect("manifest serialization cannot fail")
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Clips sorted by `clip_id`.
    pub fn sorted_clips(&self) -> Vec<&ClipRecord> {
        let mut clips: Vec<&ClipRecord> = self.clips.iter().collect();
        clips.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
        clips
    }

    pub fn class_counts(&self) -> BTreeMap<EmotionLabel, usize> {
        let mut counts = BTreeMap::new();
        for c in &self.clips {
            *counts.entry(c.ground_truth).or_default() += 1;
        }
        counts
    }
}

impl fmt::Display for DatasetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetTag::Ravdess => "ravdess",
            DatasetTag::CremaD => "crema_d",
            DatasetTag::Synthetic => "synthetic",
        })
    }
}

/// Reads and validates a manifest file.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest, ManifestError> {
    let text = std::fs::read_to_string(path)?;
    Manifest::from_json(&text)
}
