#![no_main]

use libfuzzer_sys::fuzz_target;
use ucet_core::backend::{parse_mps, write_mps};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(problem) = parse_mps(text) {
        let again = parse_mps(&write_mps(&problem)).expect("written MPS parses");
        assert_eq!(again.vars.len(), problem.vars.len());
        assert_eq!(again.rows.len(), problem.rows.len());
    }
});
