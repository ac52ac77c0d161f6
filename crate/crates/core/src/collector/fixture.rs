use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use serde_json::Value;

use super::{DataSource, Endpoint, Page, SourceError, TimeWindow};
use crate::corpus::time::format_timestamp;
use crate::corpus::{comment_line, parse_comment_line, parse_video_line, video_line, Comment, Video};

/// One canned reply.
#[derive(Debug, Clone, PartialEq)]
pub enum FixtureResponse {
    Page { items: Vec<Value>, next_page_token: Option<String> },
    Error(SourceError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawError {
    kind: String,
    #[serde(default)]
    message: String,
    #[serde(default)]
    retry_after_ms: Option<u64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawResponse {
    Error { error: RawError },
    Page {
        items: Vec<Value>,
        #[serde(default)]
        next_page_token: Option<String>,
    },
}

fn convert(raw: RawResponse) -> Result<FixtureResponse, String> {
    match raw {
        RawResponse::Page { items, next_page_token } => Ok(FixtureResponse::Page { items, next_page_token }),
        RawResponse::Error { error } => {
            let e = match error.kind.as_str() {
                "transport" => SourceError::Transport(error.message),
                "rate_limited" => SourceError::RateLimited { retry_after: error.retry_after_ms.map(Duration::from_millis) },
                "not_found" => SourceError::NotFound(error.message),
                "invalid" => SourceError::Invalid(error.message),
                other => return Err(format!("unknown error kind '{other}'")),
            };
            Ok(FixtureResponse::Error(e))
        }
    }
}

/// Parses a fixture file: one response object, or an array of responses
/// served in order (the last one repeats).
pub fn parse_fixture_response(text: &str) -> Result<Vec<FixtureResponse>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let raws: Vec<Value> = match value {
        Value::Array(a) if a.is_empty() => return Err("empty response sequence".into()),
        Value::Array(a) => a,
        v => vec![v],
    };
    raws.into_iter()
        .map(|v| serde_json::from_value::<RawResponse>(v).map_err(|e| e.to_string()).and_then(convert))
        .collect()
}

/// Parameters of a request, sorted by name and form-encoded.
fn fixture_key(params: &mut Vec<(&str, String)>) -> String {
    params.sort();
    let mut s = form_urlencoded::Serializer::new(String::new());
    for (k, v) in params.iter() {
        s.append_pair(k, v);
    }
    s.finish()
}

fn request_path(dir: &Path, endpoint: Endpoint, mut params: Vec<(&str, String)>, token: Option<&str>) -> PathBuf {
    if let Some(t) = token {
        params.push(("page_token", t.to_string()));
    }
    dir.join(endpoint.as_str()).join(format!("{}.json", fixture_key(&mut params)))
}

fn search_params(keyword: &str, window: &TimeWindow) -> Vec<(&'static str, String)> {
    let mut p = vec![("q", keyword.to_string())];
    if let Some(f) = window.from {
        p.push(("published_after", format_timestamp(f)));
    }
    if let Some(t) = window.to {
        p.push(("published_before", format_timestamp(t)));
    }
    p
}

fn parse_items<T>(
    items: Vec<Value>,
    path: &Path,
    parse: impl Fn(&str, &str, u64) -> Result<T, crate::corpus::CorpusError>,
) -> Result<Vec<T>, SourceError> {
    let file = path.display().to_string();
    items
        .iter()
        .enumerate()
        .map(|(k, v)| parse(&v.to_string(), &file, k as u64 + 1).map_err(|e| SourceError::Invalid(e.to_string())))
        .collect()
}

/// Replays canned responses from `<dir>/<endpoint>/<params>.json`.
#[derive(Debug)]
pub struct FixtureSource {
    dir: PathBuf,
    served: HashMap<PathBuf, usize>,
}

impl FixtureSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureSource { dir: dir.into(), served: HashMap::new() }
    }

    fn respond(&mut self, path: PathBuf) -> Result<(Vec<Value>, Option<String>), SourceError> {
        let text = std::fs::read_to_string(&path).map_err(|_| SourceError::NotFound(path.display().to_string()))?;
        let responses =
            parse_fixture_response(&text).map_err(|e| SourceError::Invalid(format!("{}: {e}", path.display())))?;
        let k = self.served.entry(path).or_insert(0);
        let r = responses[(*k).min(responses.len() - 1)].clone();
        *k += 1;
        match r {
            FixtureResponse::Page { items, next_page_token } => Ok((items, next_page_token)),
            FixtureResponse::Error(e) => Err(e),
        }
    }
}

impl DataSource for FixtureSource {
    fn search(&mut self, keyword: &str, window: &TimeWindow, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        let path = request_path(&self.dir, Endpoint::Search, search_params(keyword, window), page_token);
        let (items, next_page_token) = self.respond(path.clone())?;
        Ok(Page { items: parse_items(items, &path, parse_video_line)?, next_page_token })
    }

    fn related(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        let path = request_path(&self.dir, Endpoint::Related, vec![("video_id", video_id.to_string())], page_token);
        let (items, next_page_token) = self.respond(path.clone())?;
        Ok(Page { items: parse_items(items, &path, parse_video_line)?, next_page_token })
    }

    fn comments(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Comment>, SourceError> {
        let path = request_path(&self.dir, Endpoint::Comments, vec![("video_id", video_id.to_string())], page_token);
        let (items, next_page_token) = self.respond(path.clone())?;
        Ok(Page { items: parse_items(items, &path, parse_comment_line)?, next_page_token })
    }
}

/// Passes requests through and stores each successful reply in the
/// [`FixtureSource`] layout.
pub struct RecordingSource<S> {
    inner: S,
    dir: PathBuf,
}

impl<S> RecordingSource<S> {
    pub fn new(inner: S, dir: impl Into<PathBuf>) -> Self {
        RecordingSource { inner, dir: dir.into() }
    }

    pub fn into_inner(self) -> S {
        self.inner
    }

    fn store(&self, path: &Path, items: Vec<String>, next: &Option<String>) -> Result<(), SourceError> {
        let items: Vec<Value> = items.iter().map(|l| serde_json::from_str(l).expect("canonical line is JSON")).collect();
        let doc = serde_json::json!({ "items": items, "next_page_token": next });
        let write = || -> std::io::Result<()> {
            std::fs::create_dir_all(path.parent().expect("endpoint dir"))?;
            std::fs::write(path, serde_json::to_string(&doc).expect("value serializes"))
        };
        write().map_err(|e| SourceError::Invalid(format!("cannot record {}: {e}", path.display())))
    }
}

impl<S: DataSource> DataSource for RecordingSource<S> {
    fn search(&mut self, keyword: &str, window: &TimeWindow, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        let page = self.inner.search(keyword, window, page_token)?;
        let path = request_path(&self.dir, Endpoint::Search, search_params(keyword, window), page_token);
        self.store(&path, page.items.iter().map(video_line).collect(), &page.next_page_token)?;
        Ok(page)
    }

    fn related(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        let page = self.inner.related(video_id, page_token)?;
        let path = request_path(&self.dir, Endpoint::Related, vec![("video_id", video_id.to_string())], page_token);
        self.store(&path, page.items.iter().map(video_line).collect(), &page.next_page_token)?;
        Ok(page)
    }

    fn comments(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Comment>, SourceError> {
        let page = self.inner.comments(video_id, page_token)?;
        let path = request_path(&self.dir, Endpoint::Comments, vec![("video_id", video_id.to_string())], page_token);
        self.store(&path, page.items.iter().map(comment_line).collect(), &page.next_page_token)?;
        Ok(page)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_forms() {
        let one = parse_fixture_response(r#"{"items": [], "next_page_token": "p2"}"#).unwrap();
        assert_eq!(one, vec![FixtureResponse::Page { items: vec![], next_page_token: Some("p2".into()) }]);
        let seq = parse_fixture_response(
            r#"[{"error": {"kind": "rate_limited", "retry_after_ms": 1500}}, {"items": [{"a": 1}]}]"#,
        )
        .unwrap();
        assert_eq!(seq[0], FixtureResponse::Error(SourceError::RateLimited { retry_after: Some(Duration::from_millis(1500)) }));
        assert!(matches!(&seq[1], FixtureResponse::Page { items, next_page_token: None } if items.len() == 1));
        for bad in ["[]", "{}", r#"{"error": {"kind": "boom"}}"#, "nope", r#"{"items": 3}"#] {
            assert!(parse_fixture_response(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn keys_are_sorted_and_encoded() {
        let p = request_path(Path::new("/f"), Endpoint::Search, search_params("corona virus", &TimeWindow::default()), Some("a/b"));
        assert_eq!(p, Path::new("/f/search/page_token=a%2Fb&q=corona+virus.json"));
    }
}
