#![no_main]

use libfuzzer_sys::fuzz_target;
use ucet_core::model::{parse_units_csv, units_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(units) = parse_units_csv(text) {
        assert_eq!(parse_units_csv(&units_to_csv(&units)).expect("written table parses"), units);
    }
});
