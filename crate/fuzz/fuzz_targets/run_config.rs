#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox_cli::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::parse(text) {
        // the snapshot must load back to the same settings
        let again = RunConfig::parse(&config.snapshot()).expect("snapshot parses");
        assert_eq!(again.snapshot(), config.snapshot());
    }
});
