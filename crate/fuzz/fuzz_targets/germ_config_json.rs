#![no_main]

use germlens::config::GermSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = GermSpec::from_json(s);
});
