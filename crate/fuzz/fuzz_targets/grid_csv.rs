#![no_main]

use libfuzzer_sys::fuzz_target;

// The grid file reader rejects malformed input with an error and round-trips
// whatever it accepts byte-identically.
fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = psq_core::grid::read_csv(text) {
            let rewritten = psq_core::grid::write_csv(&grid);
            let again = psq_core::grid::read_csv(&rewritten).expect("rewrite parses");
            assert_eq!(psq_core::grid::write_csv(&again), rewritten);
        }
    }
});
