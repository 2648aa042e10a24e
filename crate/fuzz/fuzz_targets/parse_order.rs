#![no_main]

use gnar::GnarOrder;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(order) = text.parse::<GnarOrder>() {
        // the canonical form must parse back to the same order
        let again: GnarOrder = order.to_string().parse().expect("display output must parse");
        assert_eq!(again, order);
    }
});
