#![no_main]

use libfuzzer_sys::fuzz_target;
use ucet_core::backend::parse_solution;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_solution(text);
    }
});
