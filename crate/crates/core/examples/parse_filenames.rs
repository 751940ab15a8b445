//! Decodes dataset filenames into structured metadata and the shared label set.
//!
//! cargo run --example parse_filenames -- [filename ...]

use emofuse::dataset::{parse_filename, DatasetKind, FileMeta};

fn main() {
    let mut names: Vec<String> = std::env::args().skip(1).collect();
    if names.is_empty() {
        names = [
            "1001_IEO_ANG_HI.wav",
            "1091_TSI_NEU_XX.flv",
            "03-01-06-02-01-02-12.wav",
            "02-01-02-01-01-01-02.mp4",
            "01-02-03-01-02-01-07.mp4",
            "1001_IEO_NEU_HI.wav",
            "garbage.txt",
        ]
        .map(String::from)
        .to_vec();
    }

    for name in &names {
        match parse_filename(name, DatasetKind::Auto) {
            Ok(FileMeta::Crema(m)) => println!(
                "{name:<28} crema-d  actor {} sentence {} intensity {:?} -> {}",
                m.actor_id,
                m.sentence_code,
                m.intensity,
                m.canonical_label()
            ),
            Ok(FileMeta::Ravdess(m)) => {
                let label = m.canonical_label().map_or("(not in label set)".to_string(), |l| l.to_string());
                println!(
                    "{name:<28} ravdess  actor {:02} ({:?}) {:?} {:?} -> {label}",
                    m.actor,
                    m.sex(),
                    m.modality,
                    m.vocal_channel
                );
            }
            Err(e) => println!("{name:<28} rejected: {e}"),
        }
    }
}
