//! Late-fusion decision engine and evaluation harness for audio/video
//! emotion classifiers.
//!
//! The crate takes per-clip probability vectors from an audio model and a
//! video model, combines them with one of five decision methods, and scores
//! the results against ground truth decoded from CREMA-D or RAVDESS
//! filenames. A seeded synthetic generator stands in for trained models when
//! comparing the methods under controlled accuracy regimes.
//!
//! ```
//! use emofuse::{fuse_average, ProbabilityVector, TieBreakPolicy};
//!
//! let audio = ProbabilityVector::normalize([0.6, 0.0, 0.0, 0.4, 0.0, 0.0]).unwrap();
//! let video = ProbabilityVector::normalize([0.2, 0.0, 0.0, 0.8, 0.0, 0.0]).unwrap();
//! let fused = fuse_average(&audio, &video, TieBreakPolicy::LowestIndex);
//! assert_eq!(fused.label.as_str(), "happy");
//! ```

pub mod cli;
pub mod dataset;
pub mod eval;
pub mod fusion;
pub mod labels;
pub mod manifest;
pub mod metrics;
pub mod report;
pub mod synth;

pub use dataset::{
    build_holdout_split, parse_crema_filename, parse_filename, parse_ravdess_filename, CremaMeta, DatasetKind, FileMeta,
    FilenameError, RavdessMeta, SplitManifest, SplitOptions,
};
pub use eval::{evaluate, EvalError, EvaluationReport, MethodReport, ReportMethod};
pub use fusion::{
    fuse, fuse_average, fuse_confidence_threshold, fuse_dynamic_weighting, fuse_pair, fuse_rule_based, fuse_weighted_average,
    DynamicMode, FusedPrediction, FusionConfig, FusionError, FusionMethod, Provenance,
};
pub use labels::{argmax_label, EmotionLabel, LabelError, Modality, ModalityPrediction, ProbabilityVector, TieBreakPolicy};
pub use manifest::{load_manifest, ClipRecord, DatasetTag, Manifest, ManifestError, ModelInfo, ModelsMeta};
pub use metrics::{compute_metrics, confusion_matrix, ConfusionMatrix, MetricBundle, MetricsError};
pub use report::{render_report, ReportFormat};
pub use synth::{generate_manifest, run_benchmark, SynthParams};
