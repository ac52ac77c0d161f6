#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::corpus::parse_channels;

fuzz_target!(|data: &[u8]| {
    if let Ok(channels) = parse_channels(data, "channels.csv") {
        assert!(channels.iter().all(|c| !c.channel_id.is_empty()));
    }
});
