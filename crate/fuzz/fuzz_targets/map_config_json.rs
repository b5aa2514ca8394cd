#![no_main]

use germlens::config::MapSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = MapSpec::from_json(s) {
        let _ = spec.build();
    }
});
