#![no_main]

use gnar::io::{parse_edge_list, write_edge_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = parse_edge_list(text, None) {
        let again = parse_edge_list(&write_edge_list(&net), None).expect("written edge list must parse");
        assert_eq!(again, net);
        let dist = net.distances();
        for i in 0..net.node_count() {
            assert_eq!(dist.get(i, i), Some(0));
        }
    }
});
