#![no_main]

use libfuzzer_sys::fuzz_target;

// The experiment config parser must reject arbitrary input gracefully:
// no panics, and anything it accepts must satisfy every cross-field
// constraint it promises to enforce.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = npab::config::parse_config(text) {
        if let (Some(n), Some(r)) = (config.n, config.r) {
            assert!(r >= 1 && (2 * n) % r == 0);
        }
        assert!(config.abort_threshold > 0.0 && config.abort_threshold < 1.0);
    }
});
