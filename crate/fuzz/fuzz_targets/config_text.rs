//! The flat key=value config parser must never panic on arbitrary text, and
//! whatever it accepts must survive the downstream schema walkers.
#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pairs) = asd::cli::parse_config_text("fuzz.cfg", text) {
        let _ = asd::cli::simulate_config(pairs.clone());
        let _ = asd::cli::replay_invocation(pairs);
    }
});
