//! Canonical emotion labels and probability vectors.
//!
//! Every modality and every fusion method exchanges [`ProbabilityVector`]s
//! indexed by [`EmotionLabel`] in canonical (alphabetical) order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of canonical emotion classes.
pub const NUM_LABELS: usize = 6;

/// Maximum deviation of a vector's sum from 1 that is accepted at ingestion.
pub const INGEST_SUM_TOLERANCE: f64 = 1e-3;

/// Deviation above which ingestion logs a renormalization warning.
pub const SILENT_SUM_TOLERANCE: f64 = 1e-6;

/// Deviation small enough to be rounding noise; such vectors are kept verbatim.
pub const EXACT_SUM_TOLERANCE: f64 = 1e-12;

/// One of the six emotions shared by both datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Anger,
    Disgust,
    Fearful,
    Happy,
    Neutral,
    Sad,
}

impl EmotionLabel {
    /// All labels in canonical order.
    pub const ALL: [EmotionLabel; NUM_LABELS] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fearful,
        EmotionLabel::Happy,
        EmotionLabel::Neutral,
        EmotionLabel::Sad,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fearful => "fearful",
            EmotionLabel::Happy => "happy",
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Sad => "sad",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| LabelError::UnknownLabel(s.to_string()))
    }
}

/// Input modality of a clip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Audio,
    Video,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Audio => "audio",
            Modality::Video => "video",
        })
    }
}

/// How equal maxima are resolved when extracting a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreakPolicy {
    /// Lowest canonical index wins (alphabetical order).
    #[default]
    LowestIndex,
    HighestIndex,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabelError {
    #[error("unknown emotion label `{0}`")]
    UnknownLabel(String),
    #[error("probability vector has no positive mass")]
    AllZero,
    #[error("probability component {index} is negative ({value})")]
    NegativeMass { index: usize, value: f64 },
    #[error("probability component {index} is not finite")]
    NonFinite { index: usize },
    #[error("probabilities sum to {sum}, more than {tolerance} away from 1")]
    SumOutOfTolerance { sum: f64, tolerance: f64 },
}

/// A distribution over the six canonical labels.
///
/// Construct through [`ProbabilityVector::normalize`] or
/// [`ProbabilityVector::ingest`]; every instance has non-negative
/// components summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityVector([f64; NUM_LABELS]);

impl ProbabilityVector {
    /// Rescales non-negative mass so it sums to 1.
    pub fn normalize(raw: [f64; NUM_LABELS]) -> Result<Self, LabelError> {
        check_components(&raw)?;
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(LabelError::AllZero);
        }
        Ok(Self(raw.map(|x| x / sum)))
    }

    /// Validates a vector exported by a model.
    ///
    /// Sums further than [`INGEST_SUM_TOLERANCE`] from 1 are rejected. Anything
    /// closer is renormalized, with a warning when the deviation exceeds
    /// [`SILENT_SUM_TOLERANCE`]. Vectors within [`EXACT_SUM_TOLERANCE`] are
    /// stored as given.
    pub fn ingest(raw: [f64; NUM_LABELS]) -> Result<Self, LabelError> {
        check_components(&raw)?;
        let sum: f64 = raw.iter().sum();
        let deviation = (sum - 1.0).abs();
        if deviation > INGEST_SUM_TOLERANCE {
            return Err(LabelError::SumOutOfTolerance {
                sum,
                tolerance: INGEST_SUM_TOLERANCE,
            });
        }
        if deviation > SILENT_SUM_TOLERANCE {
            log::warn!("renormalizing probability vector summing to {sum}");
        }
        if deviation <= EXACT_SUM_TOLERANCE {
            // Already normalized up to rounding; keep the exact bits so a
            // save/load cycle is lossless.
            return Ok(Self(raw));
        }
        Self::normalize(raw)
    }

    /// A point mass on `label`.
    pub fn one_hot(label: EmotionLabel) -> Self {
        let mut mass = [0.0; NUM_LABELS];
        mass[label.index()] = 1.0;
        Self(mass)
    }

    pub fn uniform() -> Self {
        Self([1.0 / NUM_LABELS as f64; NUM_LABELS])
    }

    /// Wraps a convex combination of valid vectors without rescaling it, so
    /// that fused components keep their exact arithmetic values.
    pub(crate) fn from_convex(mass: [f64; NUM_LABELS]) -> Self {
        debug_assert!(mass.iter().all(|&x| x >= 0.0));
        debug_assert!((mass.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self(mass)
    }

    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.0[label.index()]
    }

    pub fn as_array(&self) -> &[f64; NUM_LABELS] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Largest component, i.e. the confidence of the argmax label.
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self, tie_break: TieBreakPolicy) -> (EmotionLabel, f64) {
        argmax_label(self, tie_break)
    }

    /// Relabels components: output component `perm[i]` takes input component `i`.
    pub fn permuted(&self, perm: &[usize; NUM_LABELS]) -> Self {
        let mut out = [0.0; NUM_LABELS];
        for (i, &target) in perm.iter().enumerate() {
            out[target] = self.0[i];
        }
        Self(out)
    }
}

fn check_components(raw: &[f64; NUM_LABELS]) -> Result<(), LabelError> {
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(LabelError::NonFinite { index });
        }
        if value < 0.0 {
            return Err(LabelError::NegativeMass { index, value });
        }
    }
    Ok(())
}

/// Returns the label with the largest probability and that probability.
pub fn argmax_label(probs: &ProbabilityVector, tie_break: TieBreakPolicy) -> (EmotionLabel, f64) {
    let mass = probs.as_array();
    let mut best = 0;
    for i in 1..NUM_LABELS {
        let better = match tie_break {
            TieBreakPolicy::LowestIndex => mass[i] > mass[best],
            TieBreakPolicy::HighestIndex => mass[i] >= mass[best],
        };
        if better {
            best = i;
        }
    }
    (EmotionLabel::ALL[best], mass[best])
}

/// A single modality's output for one clip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalityPrediction {
    pub modality: Modality,
    pub probs: ProbabilityVector,
    pub label: EmotionLabel,
    pub confidence: f64,
}

impl ModalityPrediction {
    pub fn new(modality: Modality, probs: ProbabilityVector, tie_break: TieBreakPolicy) -> Self {
        let (label, confidence) = argmax_label(&probs, tie_break);
        Self {
            modality,
            probs,
            label,
            confidence,
        }
    }
}
