//! Replays the checked-in fuzz seeds through the same parser entry points the
//! fuzz targets use, so the seeds stay meaningful as the formats evolve.

use std::fs;
use std::path::PathBuf;

use wspline::cli::config::FileConfig;
use wspline::datasets::{read_sequence_csv, sequence_to_csv};
use wspline::TrajectoryForest;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn sequence_csv_seeds() {
    let mut accepted = 0;
    for (name, bytes) in seeds("sequence_csv") {
        if let Ok(seq) = read_sequence_csv(bytes.as_slice()) {
            accepted += 1;
            let again = read_sequence_csv(sequence_to_csv(&seq).as_bytes()).unwrap();
            assert_eq!(again.times(), seq.times(), "{name}");
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn run_config_seeds() {
    let results: Vec<(String, bool)> = seeds("run_config")
        .into_iter()
        .map(|(name, bytes)| {
            let ok = FileConfig::parse(std::str::from_utf8(&bytes).unwrap())
                .and_then(FileConfig::resolve)
                .is_ok();
            (name, ok)
        })
        .collect();
    assert_eq!(
        results,
        vec![
            ("all_keys.json".to_string(), true),
            ("empty.json".to_string(), true),
            ("four_point.json".to_string(), true),
            ("unknown_key.json".to_string(), false),
        ]
    );
}

#[test]
fn forest_json_seeds() {
    for (name, bytes) in seeds("forest_json") {
        let parsed = TrajectoryForest::from_json(std::str::from_utf8(&bytes).unwrap());
        assert_eq!(parsed.is_ok(), name != "dangling_edge.json", "{name}");
    }
}
