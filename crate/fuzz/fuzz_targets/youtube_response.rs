#![no_main]

use libfuzzer_sys::fuzz_target;
use threadtox::collector::{parse_comment_threads, parse_video_list, status_error};

// First two bytes pick an HTTP status; the rest is the body.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let status = u16::from_le_bytes([data[0], data[1]]) % 600;
    let body = String::from_utf8_lossy(&data[2..]);
    let _ = parse_video_list(&body);
    let _ = parse_comment_threads(&body);
    let _ = status_error(status, Some(&body), &body);
});
