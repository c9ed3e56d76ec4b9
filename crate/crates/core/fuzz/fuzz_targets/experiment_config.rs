#![no_main]

use libfuzzer_sys::fuzz_target;

use bdg_core::ExperimentConfig;

// Config decoding and validation must never panic, and an accepted config
// must survive a serialization round trip.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_json(text) {
        let json = cfg.to_json().expect("accepted config must serialize");
        ExperimentConfig::from_json(&json).expect("round trip must stay valid");
    }
});
