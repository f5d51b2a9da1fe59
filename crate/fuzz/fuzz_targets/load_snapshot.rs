#![no_main]

use dhc_core::spatial::{load_snapshot, snapshot_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = load_snapshot(text) {
        let again = load_snapshot(&snapshot_to_json(&s).to_string()).expect("printed snapshot loads");
        assert_eq!(again, s);
    }
});
