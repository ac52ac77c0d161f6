#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::corpus::time::{format_timestamp, parse_timestamp};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_timestamp(text) {
        assert_eq!(parse_timestamp(&format_timestamp(t)), Ok(t));
    }
});
