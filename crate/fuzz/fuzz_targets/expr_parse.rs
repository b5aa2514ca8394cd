#![no_main]

use germlens::expr::Expr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(e) = Expr::parse(s, &["x", "y", "z"]) {
        let _ = e.eval(&[0.5, -0.25, 2.0]);
    }
});
