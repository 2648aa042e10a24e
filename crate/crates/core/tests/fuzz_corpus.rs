//! Replays the checked-in fuzz seeds through the same properties the fuzz
//! targets assert, so a stable `cargo test` catches regressions in them.

use std::path::PathBuf;

use gnar::elections::parse_returns;
use gnar::io::{
    parse_edge_list, parse_model, parse_panel, parse_partition, parse_weight_overrides, write_edge_list, write_model,
    write_panel, write_partition,
};
use gnar::GnarOrder;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn order_seeds_round_trip() {
    for (name, bytes) in seeds("parse_order") {
        let order: GnarOrder = text(&bytes).parse().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(order.to_string().parse::<GnarOrder>().unwrap(), order, "{name}");
    }
}

#[test]
fn model_seeds_round_trip() {
    for (name, bytes) in seeds("parse_model") {
        let model = parse_model(text(&bytes)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_model(&write_model(&model)).unwrap(), model, "{name}");
    }
}

#[test]
fn panel_seeds_round_trip() {
    for (name, bytes) in seeds("parse_panel") {
        let panel = parse_panel(text(&bytes)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_panel(&write_panel(&panel)).unwrap(), panel, "{name}");
    }
}

#[test]
fn edge_list_seeds_round_trip() {
    for (name, bytes) in seeds("parse_edge_list") {
        let net = parse_edge_list(text(&bytes), None).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_edge_list(&write_edge_list(&net), None).unwrap(), net, "{name}");
    }
}

#[test]
fn weight_seeds_parse() {
    for (name, bytes) in seeds("parse_weights") {
        parse_weight_overrides(text(&bytes)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn partition_seeds_round_trip() {
    for (name, bytes) in seeds("parse_partition") {
        // first byte picks the node count, as in the fuzz target
        let nodes = usize::from(bytes[0] % 16) + 1;
        let part = parse_partition(text(&bytes[1..]), nodes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_partition(&write_partition(&part), nodes).unwrap(), part, "{name}");
    }
}

#[test]
fn returns_seeds_stay_in_range() {
    let mut parsed = 0;
    for (_, bytes) in seeds("parse_returns") {
        if let Ok(r) = parse_returns(&bytes) {
            assert!(r.republican_share.values().iter().all(|v| (0.0..=100.0).contains(v)));
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}
