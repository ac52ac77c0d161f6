#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::annotation::{agreement_report, parse_annotations};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = parse_annotations(data, "annotations.csv") {
        if let Ok(report) = agreement_report(&records) {
            assert!(report.alpha <= 1.0 + 1e-12);
        }
    }
});
