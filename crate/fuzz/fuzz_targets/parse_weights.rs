#![no_main]

use gnar::io::parse_weight_overrides;
use gnar::{Network, WeightMatrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(overrides) = parse_weight_overrides(text) {
        let net = Network::new(6, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]).unwrap();
        let _ = WeightMatrix::default_for(&net.distances()).with_overrides(&overrides);
    }
});
