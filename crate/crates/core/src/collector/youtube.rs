//! Wire format of the YouTube Data API v3 and an HTTP source for it.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Page, SourceError};
use crate::corpus::time::parse_timestamp;
use crate::corpus::{Comment, Video};

/// Endpoint layout of the remote API.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub base_url: String,
    pub search_path: String,
    pub comments_path: String,
    /// Query parameter that turns a search into a related-video lookup.
    pub related_param: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub page_size: u32,
    pub timeout_secs: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            base_url: "https://www.googleapis.com/youtube/v3".into(),
            search_path: "search".into(),
            comments_path: "commentThreads".into(),
            related_param: "relatedToVideoId".into(),
            api_key_env: "THREADTOX_API_KEY".into(),
            page_size: 50,
            timeout_secs: 30,
        }
    }
}

fn invalid(msg: impl Into<String>) -> SourceError {
    SourceError::Invalid(msg.into())
}

fn str_at<'a>(v: &'a Value, path: &[&str]) -> Option<&'a str> {
    path.iter().try_fold(v, |v, k| v.get(k))?.as_str()
}

fn next_token(doc: &Value) -> Option<String> {
    doc.get("nextPageToken").and_then(Value::as_str).filter(|t| !t.is_empty()).map(str::to_string)
}

fn items(doc: &Value) -> Result<&[Value], SourceError> {
    match doc.get("items") {
        None => Ok(&[]),
        Some(Value::Array(a)) => Ok(a),
        Some(_) => Err(invalid("'items' is not an array")),
    }
}

/// Parses a `search` response. Results that are not videos (channels,
/// playlists) are skipped.
pub fn parse_video_list(body: &str) -> Result<Page<Video>, SourceError> {
    let doc: Value = serde_json::from_str(body).map_err(|e| invalid(format!("search response: {e}")))?;
    let mut out = Vec::new();
    for (k, item) in items(&doc)?.iter().enumerate() {
        let Some(video_id) = str_at(item, &["id", "videoId"]) else { continue };
        let field = |name: &str| {
            str_at(item, &["snippet", name]).ok_or_else(|| invalid(format!("search item {k}: missing snippet.{name}")))
        };
        let published_at =
            parse_timestamp(field("publishedAt")?).map_err(|e| invalid(format!("search item {k}: {e}")))?;
        out.push(Video {
            video_id: video_id.to_string(),
            channel_id: field("channelId")?.to_string(),
            title: str_at(item, &["snippet", "title"]).unwrap_or_default().to_string(),
            description: str_at(item, &["snippet", "description"]).unwrap_or_default().to_string(),
            published_at,
        });
    }
    Ok(Page { items: out, next_page_token: next_token(&doc) })
}

/// Parses a `commentThreads` response into top-level comments. Comments
/// without an author channel (deleted accounts) are dropped.
pub fn parse_comment_threads(body: &str) -> Result<Page<Comment>, SourceError> {
    let doc: Value = serde_json::from_str(body).map_err(|e| invalid(format!("comment response: {e}")))?;
    let mut out = Vec::new();
    for (k, item) in items(&doc)?.iter().enumerate() {
        let top = item
            .get("snippet")
            .and_then(|s| s.get("topLevelComment"))
            .ok_or_else(|| invalid(format!("comment item {k}: missing snippet.topLevelComment")))?;
        let comment_id = str_at(top, &["id"]).ok_or_else(|| invalid(format!("comment item {k}: missing id")))?;
        let Some(user_id) = str_at(top, &["snippet", "authorChannelId", "value"]) else { continue };
        let published = str_at(top, &["snippet", "publishedAt"])
            .ok_or_else(|| invalid(format!("comment item {k}: missing publishedAt")))?;
        let published_at = parse_timestamp(published).map_err(|e| invalid(format!("comment item {k}: {e}")))?;
        let video_id = str_at(top, &["snippet", "videoId"])
            .or_else(|| str_at(item, &["snippet", "videoId"]))
            .unwrap_or_default();
        out.push(Comment {
            comment_id: comment_id.to_string(),
            video_id: video_id.to_string(),
            user_id: user_id.to_string(),
            published_at,
            label: None,
            text: str_at(top, &["snippet", "textOriginal"]).map(str::to_string),
        });
    }
    Ok(Page { items: out, next_page_token: next_token(&doc) })
}

/// Maps a non-success HTTP status to a source error.
pub fn status_error(status: u16, retry_after: Option<&str>, body: &str) -> SourceError {
    let quota = body.contains("quotaExceeded") || body.contains("rateLimitExceeded");
    let snippet: String = body.chars().take(200).collect();
    match status {
        429 => SourceError::RateLimited { retry_after: parse_retry_after(retry_after) },
        403 if quota => SourceError::RateLimited { retry_after: parse_retry_after(retry_after) },
        404 => SourceError::NotFound(snippet),
        500..=599 => SourceError::Transport(format!("HTTP {status}: {snippet}")),
        _ => SourceError::Invalid(format!("HTTP {status}: {snippet}")),
    }
}

fn parse_retry_after(v: Option<&str>) -> Option<std::time::Duration> {
    v?.trim().parse::<u64>().ok().map(std::time::Duration::from_secs)
}

#[cfg(feature = "remote")]
mod http {
    use std::time::Duration;

    use super::*;
    use crate::collector::{DataSource, TimeWindow};
    use crate::corpus::time::format_timestamp;

    /// Live source backed by HTTPS requests.
    pub struct HttpSource {
        agent: ureq::Agent,
        config: RemoteConfig,
        key: String,
    }

    impl HttpSource {
        /// Reads the API key from the configured environment variable.
        pub fn from_env(config: RemoteConfig) -> Result<Self, SourceError> {
            let key = std::env::var(&config.api_key_env)
                .map_err(|_| invalid(format!("environment variable {} is not set", config.api_key_env)))?;
            Ok(Self::new(config, key))
        }

        pub fn new(config: RemoteConfig, key: String) -> Self {
            let agent: ureq::Agent = ureq::Agent::config_builder()
                .http_status_as_error(false)
                .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
                .build()
                .into();
            HttpSource { agent, config, key }
        }

        fn get(&self, path: &str, params: &[(&str, String)]) -> Result<String, SourceError> {
            let url = format!("{}/{}", self.config.base_url.trim_end_matches('/'), path);
            let mut req = self.agent.get(&url).query("key", &self.key);
            for (k, v) in params {
                req = req.query(*k, v);
            }
            let mut resp = req.call().map_err(|e| SourceError::Transport(e.to_string()))?;
            let status = resp.status().as_u16();
            let retry_after =
                resp.headers().get("retry-after").and_then(|v| v.to_str().ok()).map(str::to_string);
            let body = resp.body_mut().read_to_string().map_err(|e| SourceError::Transport(e.to_string()))?;
            if (200..300).contains(&status) {
                Ok(body)
            } else {
                Err(status_error(status, retry_after.as_deref(), &body))
            }
        }

        fn base(&self, token: Option<&str>) -> Vec<(&'static str, String)> {
            let mut p = vec![("part", "snippet".to_string()), ("maxResults", self.config.page_size.to_string())];
            if let Some(t) = token {
                p.push(("pageToken", t.to_string()));
            }
            p
        }
    }

    impl DataSource for HttpSource {
        fn search(&mut self, keyword: &str, window: &TimeWindow, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
            let mut p = self.base(page_token);
            p.push(("type", "video".into()));
            p.push(("q", keyword.into()));
            if let Some(f) = window.from {
                p.push(("publishedAfter", format_timestamp(f)));
            }
            if let Some(t) = window.to {
                p.push(("publishedBefore", format_timestamp(t)));
            }
            parse_video_list(&self.get(&self.config.search_path, &p)?)
        }

        fn related(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
            let mut p: Vec<(&str, String)> = self.base(page_token);
            p.push(("type", "video".into()));
            p.push((self.config.related_param.as_str(), video_id.into()));
            parse_video_list(&self.get(&self.config.search_path, &p)?)
        }

        fn comments(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Comment>, SourceError> {
            let mut p = self.base(page_token);
            p.push(("videoId", video_id.into()));
            p.push(("textFormat", "plainText".into()));
            parse_comment_threads(&self.get(&self.config.comments_path, &p)?)
        }
    }
}

#[cfg(feature = "remote")]
pub use http::HttpSource;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_page() {
        let body = r#"{
          "nextPageToken": "CAUQAA",
          "items": [
            {"id": {"kind": "youtube#video", "videoId": "abc"},
             "snippet": {"publishedAt": "2020-02-01T10:00:00Z", "channelId": "UC1", "title": "Corona update", "description": ""}},
            {"id": {"kind": "youtube#channel", "channelId": "UC2"}, "snippet": {}}
          ]}"#;
        let page = parse_video_list(body).unwrap();
        assert_eq!(page.next_page_token.as_deref(), Some("CAUQAA"));
        assert_eq!(page.items.len(), 1);
        assert_eq!(page.items[0].video_id, "abc");
        assert_eq!(page.items[0].channel_id, "UC1");
        assert_eq!(page.items[0].published_at, parse_timestamp("2020-02-01T10:00:00Z").unwrap());
        assert!(parse_video_list(r#"{"items": 1}"#).is_err());
        assert!(parse_video_list(r#"{"items": [{"id": {"videoId": "x"}, "snippet": {}}]}"#).is_err());
    }

    #[test]
    fn comment_page() {
        let body = r#"{"items": [
          {"id": "t1", "snippet": {"videoId": "abc", "topLevelComment": {"id": "c1",
             "snippet": {"authorChannelId": {"value": "UCu"}, "textOriginal": "hi", "publishedAt": "2020-02-01T11:30:00Z"}}}},
          {"id": "t2", "snippet": {"videoId": "abc", "topLevelComment": {"id": "c2",
             "snippet": {"textOriginal": "gone", "publishedAt": "2020-02-01T11:31:00Z"}}}}
        ]}"#;
        let page = parse_comment_threads(body).unwrap();
        assert_eq!(page.next_page_token, None);
        assert_eq!(page.items.len(), 1);
        let c = &page.items[0];
        assert_eq!((c.comment_id.as_str(), c.video_id.as_str(), c.user_id.as_str()), ("c1", "abc", "UCu"));
        assert_eq!(c.text.as_deref(), Some("hi"));
    }

    #[test]
    fn statuses() {
        use std::time::Duration;
        assert_eq!(status_error(429, Some("7"), ""), SourceError::RateLimited { retry_after: Some(Duration::from_secs(7)) });
        assert!(matches!(status_error(403, None, r#"{"reason":"quotaExceeded"}"#), SourceError::RateLimited { .. }));
        assert!(matches!(status_error(403, None, "forbidden"), SourceError::Invalid(_)));
        assert!(matches!(status_error(503, None, ""), SourceError::Transport(_)));
        assert!(matches!(status_error(404, None, ""), SourceError::NotFound(_)));
    }
}
