#![no_main]

use libfuzzer_sys::fuzz_target;
use psq_cli::lower::{lower_closed, lower_exact, Scope};

// Parsing plus both lowering passes: exact (polynomial / exponential-phase)
// and one-variable closed form. Inputs are size-capped to keep the exact
// arithmetic from turning into a compute benchmark.
fuzz_target!(|data: &[u8]| {
    if data.len() > 256 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(expr) = psq_cli::expr::parse(text) {
            let scope = Scope::with_params(&["lambda".to_string(), "nu".to_string()]);
            let _ = lower_exact(&expr, &scope);
            let _ = lower_closed(&expr);
        }
    }
});
