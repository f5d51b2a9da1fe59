#![no_main]

use dhc_core::dsl::{parse_rule_file, print_rule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = parse_rule_file(text) {
        let printed = print_rule(&a);
        assert_eq!(parse_rule_file(&printed).as_ref(), Ok(&a), "{printed}");
    }
});
