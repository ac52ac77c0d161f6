#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::corpus::parse_label_rows;

fuzz_target!(|data: &[u8]| {
    let _ = parse_label_rows(data, "labels.csv");
});
