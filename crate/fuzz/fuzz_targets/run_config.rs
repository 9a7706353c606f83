#![no_main]

use libfuzzer_sys::fuzz_target;
use wspline::cli::config::FileConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = FileConfig::parse(text) {
            let _ = cfg.resolve();
        }
    }
});
