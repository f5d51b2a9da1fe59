#![no_main]

use dhc_core::export::xta_check;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = xta_check(text);
    }
});
