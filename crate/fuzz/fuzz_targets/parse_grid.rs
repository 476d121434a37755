#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        // Must never panic; errors are fine. On success the grid must be
        // non-empty and strictly increasing.
        if let Ok(grid) = kpivot::harness::parse_grid(s) {
            assert!(!grid.is_empty());
            assert!(grid.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
