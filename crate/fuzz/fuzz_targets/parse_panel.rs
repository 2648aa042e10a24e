#![no_main]

use gnar::io::{parse_panel, write_panel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(panel) = parse_panel(text) {
        let again = parse_panel(&write_panel(&panel)).expect("written panel must parse");
        assert_eq!(again.values(), panel.values());
    }
});
