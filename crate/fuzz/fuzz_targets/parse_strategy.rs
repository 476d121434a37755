#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        // Must never panic; any outcome other than a clean error must be one
        // of the three strategy variants.
        let _ = kpivot::harness::parse_strategy(s);
    }
});
