#![no_main]

use dhc_core::usltr::{parse_formula, parse_formula_with, ParseOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_formula(text) {
        let printed = f.to_string();
        assert_eq!(parse_formula(&printed).as_ref(), Ok(&f), "{printed}");
    }
    let _ = parse_formula_with(text, ParseOptions { somewhere_brackets: false });
});
