#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::corpus::parse_questionable_list;

fuzz_target!(|data: &[u8]| {
    let _ = parse_questionable_list(data, "questionable.txt");
});
