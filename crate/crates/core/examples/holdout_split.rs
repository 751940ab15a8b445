//! Builds a seeded, leakage-free holdout split over a synthetic RAVDESS listing.
//!
//! Every speech clip exists as a full audio-video file (modality 01) and a
//! video-only twin (02). The twin of each holdout clip must stay out of training.
//!
//! cargo run --example holdout_split -- [seed]

use std::collections::BTreeSet;

use emofuse::dataset::{build_holdout_split, parse_ravdess_filename, SplitOptions};

fn listing() -> Vec<String> {
    let mut files = Vec::new();
    for actor in 1..=24u8 {
        for emotion in 1..=8u8 {
            for statement in 1..=2u8 {
                for modality in [1u8, 2, 3] {
                    files.push(format!("{modality:02}-01-{emotion:02}-01-{statement:02}-01-{actor:02}.mp4"));
                }
            }
        }
    }
    files
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let files = listing();
    let split = build_holdout_split(&files, 105, seed, SplitOptions::default())?;

    println!("{} files listed, seed {seed}", files.len());
    println!("holdout: {}  train: {}", split.holdout_files.len(), split.train_files.len());

    let train: BTreeSet<&str> = split.train_files.iter().map(String::as_str).collect();
    let mut leaked = 0;
    for f in &split.holdout_files {
        let twin = parse_ravdess_filename(f)?.with_modality(emofuse::dataset::RavdessModality::VideoOnly);
        if train.iter().any(|t| t.starts_with(&twin.stem())) {
            leaked += 1;
        }
    }
    println!("video-only twins of holdout clips found in train: {leaked}");
    println!("first holdout files:");
    for f in split.holdout_files.iter().take(5) {
        println!("  {f}");
    }
    Ok(())
}
