//! The `emofuse` command line.
//!
//! Exit codes: 0 on success, 1 on domain or validation errors (including bad
//! flags), 2 on I/O or schema errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dataset::{build_holdout_split, parse_filename, DatasetKind, FileMeta, SplitOptions, DEFAULT_HOLDOUT_SIZE};
use crate::eval::{evaluate, fuse_manifest, ReportMethod};
use crate::fusion::{DynamicMode, FusionConfig, FusionMethod, DEFAULT_AGREEMENT_THRESHOLD, DEFAULT_VIDEO_THRESHOLD};
use crate::manifest::{load_manifest, ManifestError};
use crate::report::{parse_json_report, render_report, to_stable_json, ReportFormat};
use crate::synth::{generate_manifest, SynthParams, DEFAULT_PEAK_HIGH, DEFAULT_PEAK_LOW};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Seed used by `split` when none is given.
pub const DEFAULT_SPLIT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "emofuse", version, about = "Late fusion of audio/video emotion predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decode a CREMA-D or RAVDESS filename.
    Parse {
        filename: String,
        #[arg(long, value_enum, default_value_t = DatasetArg::Auto)]
        dataset: DatasetArg,
    },
    /// Build the train/holdout split from a RAVDESS listing.
    Split {
        /// Newline-delimited file list.
        #[arg(long, conflicts_with = "dir", required_unless_present = "dir")]
        files: Option<PathBuf>,
        /// Directory to list instead of a file list.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_HOLDOUT_SIZE)]
        holdout_size: usize,
        #[arg(long, default_value_t = DEFAULT_SPLIT_SEED)]
        seed: u64,
        #[arg(long)]
        include_song: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a manifest against the schema and probability rules.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Fuse every two-modality clip with one method.
    Fuse {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "average")]
        method: String,
        #[command(flatten)]
        fusion: FusionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score baselines and fusion methods over a manifest.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value = "json")]
        format: String,
        #[command(flatten)]
        fusion: FusionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic manifest.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        acc_audio: f64,
        #[arg(long)]
        acc_video: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_PEAK_LOW)]
        peak_low: f64,
        #[arg(long, default_value_t = DEFAULT_PEAK_HIGH)]
        peak_high: f64,
        /// Upper bound on misclassified vectors' peak mass (defaults to the
        /// midpoint of the peak range).
        #[arg(long)]
        miss_peak_high: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render a saved JSON report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "md")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DatasetArg {
    Crema,
    Ravdess,
    Auto,
}

#[derive(Debug, Args)]
struct FusionArgs {
    #[arg(long, default_value_t = DEFAULT_VIDEO_THRESHOLD)]
    video_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_AGREEMENT_THRESHOLD)]
    agreement_threshold: f64,
    #[arg(long)]
    weight_audio: Option<f64>,
    #[arg(long)]
    weight_video: Option<f64>,
    #[arg(long, default_value = "inverse_confidence")]
    dynamic_mode: String,
}

impl FusionArgs {
    fn config(&self) -> Result<FusionConfig, Failure> {
        Ok(FusionConfig {
            video_conf_threshold: self.video_threshold,
            agreement_threshold: self.agreement_threshold,
            weight_audio: self.weight_audio,
            weight_video: self.weight_video,
            dynamic_mode: self.dynamic_mode.parse::<DynamicMode>().map_err(Failure::domain)?,
            ..FusionConfig::default()
        })
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn domain(e: impl ToString) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: e.to_string(),
        }
    }

    fn io(e: impl ToString) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        if e.is_validation() {
            Failure::domain(e)
        } else {
            Failure::io(e)
        }
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(bytes).map_err(Failure::io),
    }
}

fn read_listing(files: Option<&Path>, dir: Option<&Path>) -> Result<Vec<String>, Failure> {
    if let Some(path) = files {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        return Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect());
    }
    let dir = dir.expect("clap requires --files or --dir");
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))? {
        let entry = entry.map_err(Failure::io)?;
        if entry.file_type().map_err(Failure::io)?.is_file() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

fn parse_json(meta: &FileMeta) -> serde_json::Value {
    let canonical = meta
        .canonical_label()
        .map(|l| l.to_string())
        .unwrap_or_else(|| "unsupported".to_string());
    match meta {
        FileMeta::Crema(m) => json!({
            "dataset": "crema_d",
            "actor_id": m.actor_id,
            "sentence_code": m.sentence_code,
            "emotion_code": m.emotion_code,
            "intensity": m.intensity,
            "emotion": canonical,
            "canonical": canonical,
        }),
        FileMeta::Ravdess(m) => json!({
            "dataset": "ravdess",
            "modality": m.modality,
            "vocal_channel": m.vocal_channel,
            "emotion_code": m.emotion_code.code(),
            "emotion": m.emotion_code,
            "intensity": m.intensity,
            "statement": m.statement,
            "repetition": m.repetition,
            "actor": m.actor,
            "sex": m.sex(),
            "canonical": canonical,
        }),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Parse { filename, dataset } => {
            let kind = match dataset {
                DatasetArg::Crema => DatasetKind::Crema,
                DatasetArg::Ravdess => DatasetKind::Ravdess,
                DatasetArg::Auto => DatasetKind::Auto,
            };
            let meta = parse_filename(&filename, kind).map_err(Failure::domain)?;
            let mut bytes = serde_json::to_vec(&parse_json(&meta)).expect("json value");
            bytes.push(b'\n');
            write_output(None, &bytes, stdout)
        }
        Command::Split {
            files,
            dir,
            holdout_size,
            seed,
            include_song,
            out,
        } => {
            let listing = read_listing(files.as_deref(), dir.as_deref())?;
            let split = build_holdout_split(&listing, holdout_size, seed, SplitOptions { include_song }).map_err(Failure::domain)?;
            let mut bytes = serde_json::to_vec_pretty(&split).expect("split manifest");
            bytes.push(b'\n');
            write_output(out.as_deref(), &bytes, stdout)
        }
        Command::Validate { manifest } => {
            let m = load_manifest(&manifest)?;
            let both = m.clips.iter().filter(|c| c.has_both()).count();
            let summary = json!({
                "clips": m.clips.len(),
                "clips_with_both_modalities": both,
                "digest": m.digest(),
                "schema_version": m.schema_version,
                "valid": true,
            });
            let mut bytes = serde_json::to_vec(&summary).expect("json value");
            bytes.push(b'\n');
            write_output(None, &bytes, stdout)
        }
        Command::Fuse {
            manifest,
            method,
            fusion,
            out,
        } => {
            let m = load_manifest(&manifest)?;
            let method: FusionMethod = method.parse().map_err(Failure::domain)?;
            let config = fusion.config()?.with_method(method);
            let decisions = fuse_manifest(&m, &config).map_err(Failure::domain)?;
            write_output(out.as_deref(), &to_stable_json(&decisions), stdout)
        }
        Command::Evaluate {
            manifest,
            methods,
            format,
            fusion,
            out,
        } => {
            let format: ReportFormat = format.parse().map_err(Failure::domain)?;
            let methods = ReportMethod::parse_list(&methods).map_err(Failure::domain)?;
            let config = fusion.config()?;
            let m = load_manifest(&manifest)?;
            let report = evaluate(&m, &methods, &config).map_err(Failure::domain)?;
            write_output(out.as_deref(), &render_report(&report, format), stdout)
        }
        Command::Synth {
            n,
            acc_audio,
            acc_video,
            seed,
            peak_low,
            peak_high,
            miss_peak_high,
            out,
        } => {
            let params = SynthParams {
                n_clips: n,
                acc_audio,
                acc_video,
                peak_low,
                peak_high,
                miss_peak_high,
                seed,
            };
            let manifest = generate_manifest(&params).map_err(Failure::domain)?;
            let mut bytes = manifest.to_json().into_bytes();
            bytes.push(b'\n');
            write_output(Some(&out), &bytes, stdout)?;
            writeln!(stdout, "{}", manifest.digest()).map_err(Failure::io)
        }
        Command::Report { input, format, out } => {
            let format: ReportFormat = format.parse().map_err(Failure::domain)?;
            let bytes = fs::read(&input).map_err(|e| Failure::io(format!("{}: {e}", input.display())))?;
            let report = parse_json_report(&bytes).map_err(Failure::io)?;
            write_output(out.as_deref(), &render_report(&report, format), stdout)
        }
    }
}

/// Runs the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_DOMAIN
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary. Honors `EMOFUSE_LOG` (default `warn`).
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EMOFUSE_LOG", "warn")).init();
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
