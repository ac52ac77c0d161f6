#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::collector::parse_fixture_response;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(responses) = parse_fixture_response(text) {
        assert!(!responses.is_empty());
    }
});
