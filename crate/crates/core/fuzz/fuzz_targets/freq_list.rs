#![no_main]

use beamsim::config::parse_frequency_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(list) = parse_frequency_list(text) {
            assert!(!list.is_empty() && list.iter().all(|f| f.is_finite()));
        }
    }
});
