#![no_main]

use beamsim::config::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = parse_config(text) else {
        return;
    };
    // A validated config must yield a usable array or a clean error.
    for kind in cfg.geometry_kinds() {
        if let Ok(geom) = cfg.array(kind) {
            geom.validate().expect("constructed geometry is valid");
        }
    }
});
