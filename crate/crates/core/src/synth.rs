//! Seeded synthetic manifests with controllable per-modality accuracy.
//!
//! Each clip draws a ground truth uniformly. Each modality then independently
//! puts its mode on the truth with probability equal to its target accuracy,
//! otherwise on a uniformly chosen wrong label. The mode receives a mass drawn
//! uniformly from `[peak_low, peak_high]` for correct vectors and from
//! `[peak_low, miss_peak_high]` for wrong ones. The remaining mass is spread
//! over the other five labels by normalized uniform draws, resampled until
//! every residual share is below `peak_low - RESIDUAL_MARGIN` so the intended
//! mode is the strict argmax.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{evaluate, EvalError, EvaluationReport, ReportMethod};
use crate::fusion::FusionConfig;
use crate::labels::{EmotionLabel, ProbabilityVector, NUM_LABELS};
use crate::manifest::{ClipRecord, DatasetTag, Manifest, ModelInfo, ModelsMeta};

pub const DEFAULT_PEAK_LOW: f64 = 0.5;
pub const DEFAULT_PEAK_HIGH: f64 = 0.95;
pub const RESIDUAL_MARGIN: f64 = 1e-6;

const MAX_RESIDUAL_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_clips: usize,
    pub acc_audio: f64,
    pub acc_video: f64,
    pub peak_low: f64,
    pub peak_high: f64,
    /// Upper bound on the mode mass of misclassified vectors. `None` uses the
    /// midpoint of `[peak_low, peak_high]`; `Some(peak_high)` makes confidence
    /// independent of correctness.
    pub miss_peak_high: Option<f64>,
    pub seed: u64,
}

impl SynthParams {
    pub fn new(n_clips: usize, acc_audio: f64, acc_video: f64, seed: u64) -> Self {
        Self {
            n_clips,
            acc_audio,
            acc_video,
            peak_low: DEFAULT_PEAK_LOW,
            peak_high: DEFAULT_PEAK_HIGH,
            miss_peak_high: None,
            seed,
        }
    }

    pub fn miss_peak_high(&self) -> f64 {
        self.miss_peak_high.unwrap_or((self.peak_low + self.peak_high) / 2.0)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidParams(msg));
        if self.n_clips == 0 {
            return bad("n_clips must be positive".into());
        }
        for (name, acc) in [("acc_audio", self.acc_audio), ("acc_video", self.acc_video)] {
            if !(acc > 0.0 && acc < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {acc}"));
            }
        }
        let floor = 1.0 / NUM_LABELS as f64;
        if !(self.peak_low > floor && self.peak_high <= 1.0 && self.peak_low < self.peak_high) {
            return bad(format!(
                "need 1/6 < peak_low < peak_high <= 1, got peak_low={} peak_high={}",
                self.peak_low, self.peak_high
            ));
        }
        let miss = self.miss_peak_high();
        if !(miss > self.peak_low && miss <= self.peak_high) {
            return bad(format!("miss_peak_high must lie in (peak_low, peak_high], got {miss}"));
        }
        Ok(())
    }
}

/// Five residual shares summing to `mass`, each below `cap`.
fn residual_shares(rng: &mut ChaCha8Rng, mass: f64, cap: f64) -> [f64; NUM_LABELS - 1] {
    for _ in 0..MAX_RESIDUAL_ATTEMPTS {
        let draws: [f64; NUM_LABELS - 1] = std::array::from_fn(|_| rng.random::<f64>());
        let total: f64 = draws.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let shares = draws.map(|u| u / total * mass);
        if shares.iter().all(|&s| s < cap) {
            return shares;
        }
    }
    // Only reachable when peak_low sits just above 1/6; an even split is
    // always below the cap there.
    [mass / (NUM_LABELS - 1) as f64; NUM_LABELS - 1]
}

fn modality_vector(rng: &mut ChaCha8Rng, truth: EmotionLabel, accuracy: f64, params: &SynthParams) -> ProbabilityVector {
    let correct = rng.random::<f64>() < accuracy;
    let mode = if correct {
        truth.index()
    } else {
        let k = rng.random_range(0..NUM_LABELS - 1);
        if k >= truth.index() {
            k + 1
        } else {
            k
        }
    };
    let upper = if correct { params.peak_high } else { params.miss_peak_high() };
    let peak = rng.random_range(params.peak_low..=upper);
    let shares = residual_shares(rng, 1.0 - peak, params.peak_low - RESIDUAL_MARGIN);

    let mut mass = [0.0; NUM_LABELS];
    mass[mode] = peak;
    let others = (0..NUM_LABELS).filter(|&i| i != mode);
    for (i, share) in others.zip(shares) {
        mass[i] = share;
    }
    ProbabilityVector::normalize(mass).expect("peak mass is positive")
}

/// Builds a manifest of `n_clips` synthetic clips. Identical parameters give
/// identical manifests.
pub fn generate_manifest(params: &SynthParams) -> Result<Manifest, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let width = params.n_clips.to_string().len().max(6);
    let clips = (0..params.n_clips)
        .map(|i| {
            let truth = EmotionLabel::ALL[rng.random_range(0..NUM_LABELS)];
            let audio = modality_vector(&mut rng, truth, params.acc_audio, params);
            let video = modality_vector(&mut rng, truth, params.acc_video, params);
            ClipRecord {
                clip_id: format!("synth-{i:0width$}"),
                dataset: DatasetTag::Synthetic,
                ground_truth: truth,
                audio: Some(audio),
                video: Some(video),
            }
        })
        .collect();
    let models = ModelsMeta {
        audio: Some(ModelInfo {
            id: "synthetic-audio".into(),
            holdout_accuracy: Some(params.acc_audio),
        }),
        video: Some(ModelInfo {
            id: "synthetic-video".into(),
            holdout_accuracy: Some(params.acc_video),
        }),
    };
    Ok(Manifest::new(models, clips))
}

/// Generates a manifest and scores both baselines and all five methods.
pub fn run_benchmark(params: &SynthParams, config: &FusionConfig) -> Result<EvaluationReport, SynthError> {
    let manifest = generate_manifest(params)?;
    let methods = ReportMethod::ALL.into_iter().collect();
    Ok(evaluate(&manifest, &methods, config)?)
}
