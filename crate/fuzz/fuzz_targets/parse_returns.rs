#![no_main]

use gnar::elections::parse_returns;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(returns) = parse_returns(data) {
        assert!(returns.republican_share.values().iter().all(|v| (0.0..=100.0).contains(v)));
    }
});
