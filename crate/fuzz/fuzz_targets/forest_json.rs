#![no_main]

use libfuzzer_sys::fuzz_target;
use wspline::TrajectoryForest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(forest) = TrajectoryForest::from_json(text) {
            let back = TrajectoryForest::from_json(&forest.to_json()).expect("reparse");
            assert_eq!(back.edges, forest.edges);
        }
    }
});
