#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::corpus::{comment_line, parse_comment_line, parse_video_line, video_line};

// Whatever parses must survive a write/parse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_video_line(text, "videos.jsonl", 1) {
        assert_eq!(parse_video_line(&video_line(&v), "videos.jsonl", 1).unwrap(), v);
    }
    if let Ok(c) = parse_comment_line(text, "comments.jsonl", 1) {
        assert_eq!(parse_comment_line(&comment_line(&c), "comments.jsonl", 1).unwrap(), c);
    }
});
