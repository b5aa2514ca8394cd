#![no_main]

use germlens_puiseux::parse_puiseux;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_puiseux(s) {
        // Printing and reparsing must give the same series.
        let back = parse_puiseux(&x.to_string()).expect("printed literal parses");
        assert_eq!(back, x);
    }
});
