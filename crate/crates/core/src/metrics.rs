//! Classification metrics over the six canonical labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{EmotionLabel, NUM_LABELS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{predictions} predictions but {truths} ground-truth labels")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("no labels to score")]
    EmptyInput,
}

/// Rows are ground truth, columns are predictions, both in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[u64; NUM_LABELS]; NUM_LABELS]);

impl ConfusionMatrix {
    pub fn get(&self, truth: EmotionLabel, predicted: EmotionLabel) -> u64 {
        self.0[truth.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_LABELS).map(|i| self.0[i][i]).sum()
    }

    pub fn row_sum(&self, truth: EmotionLabel) -> u64 {
        self.0[truth.index()].iter().sum()
    }

    pub fn col_sum(&self, predicted: EmotionLabel) -> u64 {
        self.0.iter().map(|row| row[predicted.index()]).sum()
    }
}

fn check_lengths(predictions: &[EmotionLabel], truths: &[EmotionLabel]) -> Result<(), MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if truths.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

pub fn confusion_matrix(predictions: &[EmotionLabel], truths: &[EmotionLabel]) -> Result<ConfusionMatrix, MetricsError> {
    check_lengths(predictions, truths)?;
    let mut m = ConfusionMatrix::default();
    for (p, t) in predictions.iter().zip(truths) {
        m.0[t.index()][p.index()] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Accuracy plus macro and support-weighted precision, recall, and F1.
///
/// Macro averages run over the classes present in the ground truth. Zero
/// denominators score 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub per_class: [ClassMetrics; NUM_LABELS],
    pub confusion: ConfusionMatrix,
    pub n: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricBundle {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Result<Self, MetricsError> {
        let n = confusion.total();
        if n == 0 {
            return Err(MetricsError::EmptyInput);
        }
        let per_class = EmotionLabel::ALL.map(|label| {
            let tp = confusion.get(label, label);
            let support = confusion.row_sum(label);
            let predicted = confusion.col_sum(label);
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
            }
        });

        let present: Vec<&ClassMetrics> = per_class.iter().filter(|c| c.support > 0).collect();
        let k = present.len() as f64;
        let macro_of = |f: fn(&ClassMetrics) -> f64| present.iter().map(|c| f(c)).sum::<f64>() / k;
        let weighted_of = |f: fn(&ClassMetrics) -> f64| present.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / n as f64;

        Ok(Self {
            accuracy: ratio(confusion.trace(), n),
            macro_precision: macro_of(|c| c.precision),
            macro_recall: macro_of(|c| c.recall),
            macro_f1: macro_of(|c| c.f1),
            weighted_precision: weighted_of(|c| c.precision),
            weighted_recall: weighted_of(|c| c.recall),
            weighted_f1: weighted_of(|c| c.f1),
            per_class,
            confusion,
            n,
        })
    }
}

pub fn compute_metrics(predictions: &[EmotionLabel], truths: &[EmotionLabel]) -> Result<MetricBundle, MetricsError> {
    MetricBundle::from_confusion(confusion_matrix(predictions, truths)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::EmotionLabel::*;

    fn hand_case() -> (Vec<EmotionLabel>, Vec<EmotionLabel>) {
        (vec![Anger, Happy, Happy, Sad, Sad], vec![Anger, Anger, Happy, Sad, Neutral])
    }

    #[test]
    fn five_clip_hand_case() {
        let (pred, truth) = hand_case();
        let m = compute_metrics(&pred, &truth).unwrap();
        assert_eq!(m.accuracy, 0.6);
        assert!((m.macro_precision - 0.5).abs() < 1e-15);
        assert!((m.macro_recall - 0.625).abs() < 1e-15);
        assert!((m.macro_f1 - 0.5).abs() < 1e-15);
        // Support-weighted: (2·2/3 + 2/3 + 2/3 + 0) / 5.
        assert!((m.weighted_f1 - 8.0 / 15.0).abs() < 1e-15);

        let c = m.per_class;
        assert_eq!((c[Anger.index()].precision, c[Anger.index()].recall), (1.0, 0.5));
        assert_eq!((c[Happy.index()].precision, c[Happy.index()].recall), (0.5, 1.0));
        assert_eq!((c[Neutral.index()].precision, c[Neutral.index()].f1), (0.0, 0.0));
    }

    #[test]
    fn hand_case_confusion() {
        let (pred, truth) = hand_case();
        let cm = confusion_matrix(&pred, &truth).unwrap();
        let mut expected = ConfusionMatrix::default();
        for (t, p) in [(Anger, Anger), (Anger, Happy), (Happy, Happy), (Sad, Sad), (Neutral, Sad)] {
            expected.0[t.index()][p.index()] = 1;
        }
        assert_eq!(cm, expected);
        assert_eq!(cm.row_sum(Anger), 2);
    }

    #[test]
    fn perfect_and_total_failure() {
        let truth: Vec<_> = EmotionLabel::ALL.iter().flat_map(|&l| [l, l]).collect();
        let m = compute_metrics(&truth, &truth).unwrap();
        for v in [m.accuracy, m.macro_f1, m.macro_precision, m.macro_recall, m.weighted_f1] {
            assert_eq!(v, 1.0);
        }
        let mut diag = ConfusionMatrix::default();
        for i in 0..NUM_LABELS {
            diag.0[i][i] = 2;
        }
        assert_eq!(m.confusion, diag);

        let truth = vec![Anger, Happy, Anger];
        let wrong = vec![Sad; 3];
        let m = compute_metrics(&wrong, &truth).unwrap();
        assert_eq!((m.accuracy, m.macro_f1), (0.0, 0.0));
    }

    #[test]
    fn errors() {
        assert_eq!(
            compute_metrics(&[Anger], &[]),
            Err(MetricsError::LengthMismatch { predictions: 1, truths: 0 })
        );
        assert_eq!(compute_metrics(&[], &[]), Err(MetricsError::EmptyInput));
        assert_eq!(confusion_matrix(&[], &[]), Err(MetricsError::EmptyInput));
    }
}
