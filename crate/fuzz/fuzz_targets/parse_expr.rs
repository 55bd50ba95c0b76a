#![no_main]

use libfuzzer_sys::fuzz_target;

// The parser must return a positioned error, never panic, on any input.
fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = psq_cli::expr::parse(text);
    }
});
