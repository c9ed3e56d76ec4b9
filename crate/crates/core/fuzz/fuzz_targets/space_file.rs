#![no_main]

use libfuzzer_sys::fuzz_target;

use bdg_core::prob_space::Adaptedness;
use bdg_core::serialize::SpaceFile;

// Decoding arbitrary bytes must never panic; on a successfully decoded
// file, space reconstruction and process revalidation must also be
// panic-free (errors are fine).
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = SpaceFile::from_json(text) else {
        return;
    };
    if let Ok(space) = file.to_space() {
        for pf in &file.processes {
            let _ = file.process(&space, &pf.name, Adaptedness::Raw);
            let _ = file.process(&space, &pf.name, Adaptedness::Adapted);
        }
        let _ = file.to_json();
    }
});
