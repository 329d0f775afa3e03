#![no_main]

use libfuzzer_sys::fuzz_target;
use ucet_core::model::parse_instance_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_instance_json(text, None, None);
    }
});
