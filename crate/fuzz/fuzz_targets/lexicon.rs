#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::annotation::{basic_score, parse_lexicon};

// Input is a lexicon CSV, a NUL byte, then comment text to score.
fuzz_target!(|data: &[u8]| {
    let (lexicon, text) = match data.iter().position(|&b| b == 0) {
        Some(i) => (&data[..i], &data[i + 1..]),
        None => (data, &[][..]),
    };
    if let Ok(lexicon) = parse_lexicon(lexicon, "lexicon.csv") {
        let score = basic_score(&String::from_utf8_lossy(text), &lexicon).value();
        assert!((-3..=3).contains(&score));
    }
});
