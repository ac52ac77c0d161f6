//! ISO-8601 parsing and formatting, normalized to whole UTC seconds.

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};

use super::Timestamp;

/// Parses RFC 3339 (any offset), a naive `YYYY-MM-DD[T ]HH:MM:SS[.f]` taken as
/// UTC, or a bare date at midnight UTC. Sub-second parts are floored.
pub fn parse_timestamp(s: &str) -> Result<Timestamp, String> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp());
    }
    Err(format!("invalid ISO-8601 timestamp '{s}'"))
}

pub fn format_timestamp(t: Timestamp) -> String {
    match DateTime::<Utc>::from_timestamp(t, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => t.to_string(),
    }
}

pub const DAY: i64 = 86_400;
pub const WEEK: i64 = 7 * DAY;

/// Start of the ISO week (Monday 00:00 UTC) containing `t`.
pub fn week_start(t: Timestamp) -> Timestamp {
    // 1970-01-01 was a Thursday; Monday 1969-12-29 is 3 days earlier.
    let offset = 3 * DAY;
    (t + offset).div_euclid(WEEK) * WEEK - offset
}

pub fn day_start(t: Timestamp) -> Timestamp {
    t.div_euclid(DAY) * DAY
}
