#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::toxicity::SynthSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<SynthSpec>(data) {
        let _ = spec.validate();
    }
});
