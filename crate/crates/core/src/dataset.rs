//! Filename grammars for CREMA-D and RAVDESS, label canonicalization, and
//! the held-out evaluation split.
//!
//! CREMA-D clips are named `AAAA_SSS_EEE_II.ext` (actor, sentence, emotion,
//! intensity). RAVDESS files carry seven dash-separated two-digit fields:
//! modality, vocal channel, emotion, intensity, statement, repetition, actor.

use std::collections::HashSet;
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::EmotionLabel;

/// Default number of full-AV files reserved for framework testing.
pub const DEFAULT_HOLDOUT_SIZE: usize = 105;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilenameError {
    #[error("malformed filename `{name}`: {reason}")]
    MalformedName { name: String, reason: String },
    #[error("unknown CREMA-D emotion code `{0}`")]
    UnknownEmotionCode(String),
    #[error("unknown CREMA-D intensity code `{0}`")]
    UnknownIntensity(String),
    #[error("RAVDESS field `{field}` out of range: {value:02}")]
    FieldOutOfRange { field: &'static str, value: u8 },
    #[error("RAVDESS neutral emotion cannot have strong intensity")]
    NeutralStrongForbidden,
}

fn malformed(name: &str, reason: impl Into<String>) -> FilenameError {
    FilenameError::MalformedName {
        name: name.to_string(),
        reason: reason.into(),
    }
}

/// Splits `name` into its stem and optional extension.
fn split_extension(name: &str) -> (&str, Option<&str>) {
    match name.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() => (stem, Some(ext)),
        _ => (name, None),
    }
}

// ---------------------------------------------------------------- CREMA-D

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CremaEmotion {
    #[serde(rename = "ANG")]
    Ang,
    #[serde(rename = "DIS")]
    Dis,
    #[serde(rename = "FEA")]
    Fea,
    #[serde(rename = "HAP")]
    Hap,
    #[serde(rename = "NEU")]
    Neu,
    #[serde(rename = "SAD")]
    Sad,
}

impl CremaEmotion {
    pub const ALL: [CremaEmotion; 6] = [
        CremaEmotion::Ang,
        CremaEmotion::Dis,
        CremaEmotion::Fea,
        CremaEmotion::Hap,
        CremaEmotion::Neu,
        CremaEmotion::Sad,
    ];

    pub fn code(self) -> &'static str {
        match self {
            CremaEmotion::Ang => "ANG",
            CremaEmotion::Dis => "DIS",
            CremaEmotion::Fea => "FEA",
            CremaEmotion::Hap => "HAP",
            CremaEmotion::Neu => "NEU",
            CremaEmotion::Sad => "SAD",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|e| e.code() == code)
    }

    pub fn canonical(self) -> EmotionLabel {
        match self {
            CremaEmotion::Ang => EmotionLabel::Anger,
            CremaEmotion::Dis => EmotionLabel::Disgust,
            CremaEmotion::Fea => EmotionLabel::Fearful,
            CremaEmotion::Hap => EmotionLabel::Happy,
            CremaEmotion::Neu => EmotionLabel::Neutral,
            CremaEmotion::Sad => EmotionLabel::Sad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CremaIntensity {
    #[serde(rename = "LO")]
    Low,
    #[serde(rename = "MD")]
    Medium,
    #[serde(rename = "HI")]
    High,
    #[serde(rename = "XX")]
    Unspecified,
}

impl CremaIntensity {
    pub const ALL: [CremaIntensity; 4] = [
        CremaIntensity::Low,
        CremaIntensity::Medium,
        CremaIntensity::High,
        CremaIntensity::Unspecified,
    ];

    pub fn code(self) -> &'static str {
        match self {
            CremaIntensity::Low => "LO",
            CremaIntensity::Medium => "MD",
            CremaIntensity::High => "HI",
            CremaIntensity::Unspecified => "XX",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|e| e.code() == code)
    }
}

/// Metadata decoded from a CREMA-D clip name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CremaMeta {
    pub actor_id: u16,
    pub sentence_code: String,
    pub emotion_code: CremaEmotion,
    pub intensity: CremaIntensity,
}

impl CremaMeta {
    pub fn canonical_label(&self) -> EmotionLabel {
        self.emotion_code.canonical()
    }

    /// Formats the metadata back into a filename stem (no extension).
    pub fn stem(&self) -> String {
        format!(
            "{:04}_{}_{}_{}",
            self.actor_id,
            self.sentence_code,
            self.emotion_code.code(),
            self.intensity.code()
        )
    }
}

pub fn parse_crema_filename(name: &str) -> Result<CremaMeta, FilenameError> {
    let (stem, _ext) = split_extension(name);
    let fields: Vec<&str> = stem.split('_').collect();
    if fields.len() != 4 {
        return Err(malformed(name, format!("expected 4 underscore-separated fields, found {}", fields.len())));
    }
    let (actor, sentence, emotion, intensity) = (fields[0], fields[1], fields[2], fields[3]);
    if actor.len() != 4 || !actor.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(name, "actor id must be 4 digits"));
    }
    if sentence.len() != 3 || !sentence.bytes().all(|b| b.is_ascii_uppercase()) {
        return Err(malformed(name, "sentence code must be 3 uppercase letters"));
    }
    let emotion_code =
        CremaEmotion::from_code(emotion).ok_or_else(|| FilenameError::UnknownEmotionCode(emotion.to_string()))?;
    let intensity =
        CremaIntensity::from_code(intensity).ok_or_else(|| FilenameError::UnknownIntensity(intensity.to_string()))?;
    Ok(CremaMeta {
        actor_id: actor.parse().expect("four ascii digits"),
        sentence_code: sentence.to_string(),
        emotion_code,
        intensity,
    })
}

// ---------------------------------------------------------------- RAVDESS

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RavdessModality {
    FullAv,
    VideoOnly,
    AudioOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocalChannel {
    Speech,
    Song,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RavdessEmotion {
    Neutral,
    Calm,
    Happy,
    Sad,
    Angry,
    Fearful,
    Disgust,
    Surprised,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RavdessIntensity {
    Normal,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
}

macro_rules! two_digit_code {
    ($ty:ty, $field:literal, [$($variant:expr),+ $(,)?]) => {
        impl $ty {
            const ORDER: &'static [$ty] = &[$($variant),+];

            pub fn code(self) -> u8 {
                Self::ORDER.iter().position(|&v| v == self).expect("variant listed") as u8 + 1
            }

            pub fn from_code(code: u8) -> Result<Self, FilenameError> {
                (code as usize)
                    .checked_sub(1)
                    .and_then(|i| Self::ORDER.get(i).copied())
                    .ok_or(FilenameError::FieldOutOfRange { field: $field, value: code })
            }
        }
    };
}

two_digit_code!(RavdessModality, "modality", [RavdessModality::FullAv, RavdessModality::VideoOnly, RavdessModality::AudioOnly]);
two_digit_code!(VocalChannel, "vocal_channel", [VocalChannel::Speech, VocalChannel::Song]);
two_digit_code!(
    RavdessEmotion,
    "emotion",
    [
        RavdessEmotion::Neutral,
        RavdessEmotion::Calm,
        RavdessEmotion::Happy,
        RavdessEmotion::Sad,
        RavdessEmotion::Angry,
        RavdessEmotion::Fearful,
        RavdessEmotion::Disgust,
        RavdessEmotion::Surprised,
    ]
);
two_digit_code!(RavdessIntensity, "intensity", [RavdessIntensity::Normal, RavdessIntensity::Strong]);

impl RavdessEmotion {
    /// Calm and surprised have no counterpart in the shared label set.
    pub fn canonical(self) -> Option<EmotionLabel> {
        match self {
            RavdessEmotion::Neutral => Some(EmotionLabel::Neutral),
            RavdessEmotion::Happy => Some(EmotionLabel::Happy),
            RavdessEmotion::Sad => Some(EmotionLabel::Sad),
            RavdessEmotion::Angry => Some(EmotionLabel::Anger),
            RavdessEmotion::Fearful => Some(EmotionLabel::Fearful),
            RavdessEmotion::Disgust => Some(EmotionLabel::Disgust),
            RavdessEmotion::Calm | RavdessEmotion::Surprised => None,
        }
    }
}

/// Metadata decoded from a RAVDESS filename.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RavdessMeta {
    pub modality: RavdessModality,
    pub vocal_channel: VocalChannel,
    pub emotion_code: RavdessEmotion,
    pub intensity: RavdessIntensity,
    /// 1 or 2.
    pub statement: u8,
    /// 1 or 2.
    pub repetition: u8,
    /// 1 through 24.
    pub actor: u8,
}

impl RavdessMeta {
    pub fn sex(&self) -> Sex {
        if self.actor.is_multiple_of(2) {
            Sex::Female
        } else {
            Sex::Male
        }
    }

    pub fn canonical_label(&self) -> Option<EmotionLabel> {
        self.emotion_code.canonical()
    }

    /// The same recording with a different modality field.
    pub fn with_modality(&self, modality: RavdessModality) -> Self {
        Self { modality, ..*self }
    }

    /// Formats the metadata back into a filename stem (no extension).
    pub fn stem(&self) -> String {
        format!(
            "{:02}-{:02}-{:02}-{:02}-{:02}-{:02}-{:02}",
            self.modality.code(),
            self.vocal_channel.code(),
            self.emotion_code.code(),
            self.intensity.code(),
            self.statement,
            self.repetition,
            self.actor
        )
    }
}

pub fn parse_ravdess_filename(name: &str) -> Result<RavdessMeta, FilenameError> {
    let (stem, _ext) = split_extension(name);
    let fields: Vec<&str> = stem.split('-').collect();
    if fields.len() != 7 {
        return Err(malformed(name, format!("expected 7 dash-separated fields, found {}", fields.len())));
    }
    let mut codes = [0u8; 7];
    for (slot, field) in codes.iter_mut().zip(&fields) {
        if field.len() != 2 || !field.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(name, format!("field `{field}` is not a two-digit number")));
        }
        *slot = field.parse().expect("two ascii digits");
    }
    let in_range = |field: &'static str, value: u8, max: u8| {
        if (1..=max).contains(&value) {
            Ok(value)
        } else {
            Err(FilenameError::FieldOutOfRange { field, value })
        }
    };
    let meta = RavdessMeta {
        modality: RavdessModality::from_code(codes[0])?,
        vocal_channel: VocalChannel::from_code(codes[1])?,
        emotion_code: RavdessEmotion::from_code(codes[2])?,
        intensity: RavdessIntensity::from_code(codes[3])?,
        statement: in_range("statement", codes[4], 2)?,
        repetition: in_range("repetition", codes[5], 2)?,
        actor: in_range("actor", codes[6], 24)?,
    };
    if meta.emotion_code == RavdessEmotion::Neutral && meta.intensity == RavdessIntensity::Strong {
        return Err(FilenameError::NeutralStrongForbidden);
    }
    Ok(meta)
}

// ---------------------------------------------------------------- auto-detect

/// Which filename grammar to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Crema,
    Ravdess,
    /// Underscores select CREMA-D, dashes select RAVDESS.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileMeta {
    Crema(CremaMeta),
    Ravdess(RavdessMeta),
}

impl FileMeta {
    pub fn canonical_label(&self) -> Option<EmotionLabel> {
        match self {
            FileMeta::Crema(m) => Some(m.canonical_label()),
            FileMeta::Ravdess(m) => m.canonical_label(),
        }
    }
}

pub fn parse_filename(name: &str, kind: DatasetKind) -> Result<FileMeta, FilenameError> {
    let kind = match kind {
        DatasetKind::Auto => {
            let (stem, _) = split_extension(name);
            if stem.contains('_') {
                DatasetKind::Crema
            } else if stem.contains('-') {
                DatasetKind::Ravdess
            } else {
                return Err(malformed(name, "neither a CREMA-D nor a RAVDESS name"));
            }
        }
        k => k,
    };
    match kind {
        DatasetKind::Crema => parse_crema_filename(name).map(FileMeta::Crema),
        _ => parse_ravdess_filename(name).map(FileMeta::Ravdess),
    }
}

// ---------------------------------------------------------------- split

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("invalid RAVDESS file `{file}`: {source}")]
    InvalidFile {
        file: String,
        #[source]
        source: FilenameError,
    },
    #[error("requested {requested} holdout files but only {available} eligible full-AV files exist")]
    InsufficientFiles { requested: usize, available: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SplitOptions {
    /// Keep song-channel files (excluded by default).
    pub include_song: bool,
}

/// Train/holdout partition of a RAVDESS listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub holdout_size: usize,
    pub train_files: Vec<String>,
    pub holdout_files: Vec<String>,
}

fn basename(path: &str) -> &str {
    path.rsplit(['/', '\\']).next().unwrap_or(path)
}

/// Samples `holdout_size` full-AV files uniformly without replacement and
/// removes their video-only twins from the training side.
///
/// Files with calm/surprised emotions are dropped from both sides, as are
/// song-channel files unless `options.include_song` is set. Inputs are sorted
/// before sampling, so the result depends only on the set of names and the
/// seed.
pub fn build_holdout_split(
    files: &[String],
    holdout_size: usize,
    seed: u64,
    options: SplitOptions,
) -> Result<SplitManifest, SplitError> {
    let mut parsed = Vec::with_capacity(files.len());
    for file in files {
        let meta = parse_ravdess_filename(basename(file)).map_err(|source| SplitError::InvalidFile {
            file: file.clone(),
            source,
        })?;
        if meta.canonical_label().is_none() {
            continue;
        }
        if meta.vocal_channel == VocalChannel::Song && !options.include_song {
            continue;
        }
        parsed.push((file.clone(), meta));
    }
    parsed.sort_by(|a, b| a.0.cmp(&b.0));
    parsed.dedup_by(|a, b| a.0 == b.0);

    let candidates: Vec<usize> = parsed
        .iter()
        .enumerate()
        .filter(|(_, (_, m))| m.modality == RavdessModality::FullAv)
        .map(|(i, _)| i)
        .collect();
    if candidates.len() < holdout_size {
        return Err(SplitError::InsufficientFiles {
            requested: holdout_size,
            available: candidates.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = sample(&mut rng, candidates.len(), holdout_size)
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    chosen.sort_unstable();

    let chosen_set: HashSet<usize> = chosen.iter().copied().collect();
    let twins: HashSet<RavdessMeta> = chosen
        .iter()
        .map(|&i| parsed[i].1.with_modality(RavdessModality::VideoOnly))
        .collect();

    let holdout_files = chosen.iter().map(|&i| parsed[i].0.clone()).collect();
    let train_files = parsed
        .iter()
        .enumerate()
        .filter(|(i, (_, meta))| !chosen_set.contains(i) && !twins.contains(meta))
        .map(|(_, (name, _))| name.clone())
        .collect();

    Ok(SplitManifest {
        seed,
        holdout_size,
        train_files,
        holdout_files,
    })
}

impl fmt::Display for RavdessModality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RavdessModality::FullAv => "full_av",
            RavdessModality::VideoOnly => "video_only",
            RavdessModality::AudioOnly => "audio_only",
        })
    }
}
