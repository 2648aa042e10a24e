#![no_main]

use gnar::io::{parse_model, write_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = parse_model(text) {
        let again = parse_model(&write_model(&model)).expect("written model must parse");
        assert_eq!(again, model);
    }
});
