#![no_main]

use libfuzzer_sys::fuzz_target;
use wspline::datasets::{read_sequence_csv, sequence_to_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(seq) = read_sequence_csv(data) {
        // anything accepted must survive a write/read cycle
        let again = read_sequence_csv(sequence_to_csv(&seq).as_bytes()).expect("reparse");
        assert_eq!(again.len(), seq.len());
        assert_eq!(again.times(), seq.times());
    }
});
