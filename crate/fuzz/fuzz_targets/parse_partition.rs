#![no_main]

use gnar::io::{parse_partition, write_partition};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&nodes, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let nodes = usize::from(nodes % 16) + 1;
    if let Ok(part) = parse_partition(text, nodes) {
        let again = parse_partition(&write_partition(&part), nodes).expect("written partition must parse");
        assert_eq!(again, part);
    }
});
