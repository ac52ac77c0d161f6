//! Acquisition client for a paginated video/comment API: keyword search,
//! related-video crawling and resumable comment download.

mod client;
mod comments;
mod crawl;
mod fixture;
mod youtube;

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use crate::corpus::{Comment, Timestamp, Video};

pub use client::{Client, ClientConfig, ClientStats, Clock, ManualClock, RetryPolicy, SystemClock};
pub use comments::{fetch_comments, FetchCheckpoint, FetchOptions, FetchSummary};
pub use crawl::{crawl_related, filter_matching, search_videos, CrawlLimits, CrawlState};
pub use fixture::{parse_fixture_response, FixtureResponse, FixtureSource, RecordingSource};
#[cfg(feature = "remote")]
pub use youtube::HttpSource;
pub use youtube::{parse_comment_threads, parse_video_list, status_error, RemoteConfig};

/// Search terms used when none are given.
pub const DEFAULT_KEYWORDS: [&str; 6] = ["coronavirus", "nCov", "corona virus", "corona-virus", "covid", "SARS-CoV"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Search,
    Related,
    Comments,
}

impl Endpoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Endpoint::Search => "search",
            Endpoint::Related => "related",
            Endpoint::Comments => "comments",
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Publication-time bounds for search results, both inclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TimeWindow {
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
}

impl TimeWindow {
    pub fn contains(&self, t: Timestamp) -> bool {
        self.from.is_none_or(|f| t >= f) && self.to.is_none_or(|u| t <= u)
    }
}

/// One page of results.
#[derive(Debug, Clone, PartialEq)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub next_page_token: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SourceError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("rate limited")]
    RateLimited { retry_after: Option<Duration> },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invalid response: {0}")]
    Invalid(String),
}

impl SourceError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, SourceError::Transport(_) | SourceError::RateLimited { .. })
    }
}

/// Paginated endpoints of a remote data source.
pub trait DataSource {
    fn search(&mut self, keyword: &str, window: &TimeWindow, page_token: Option<&str>) -> Result<Page<Video>, SourceError>;
    fn related(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Video>, SourceError>;
    fn comments(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Comment>, SourceError>;
}

impl<S: DataSource + ?Sized> DataSource for &mut S {
    fn search(&mut self, keyword: &str, window: &TimeWindow, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        (**self).search(keyword, window, page_token)
    }

    fn related(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        (**self).related(video_id, page_token)
    }

    fn comments(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Comment>, SourceError> {
        (**self).comments(video_id, page_token)
    }
}

impl<S: DataSource + ?Sized> DataSource for Box<S> {
    fn search(&mut self, keyword: &str, window: &TimeWindow, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        (**self).search(keyword, window, page_token)
    }

    fn related(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Video>, SourceError> {
        (**self).related(video_id, page_token)
    }

    fn comments(&mut self, video_id: &str, page_token: Option<&str>) -> Result<Page<Comment>, SourceError> {
        (**self).comments(video_id, page_token)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CollectError {
    #[error("{endpoint} '{key}': {source}")]
    Source {
        endpoint: Endpoint,
        key: String,
        #[source]
        source: SourceError,
    },
    #[error("{endpoint} '{key}' repeated page token '{token}'")]
    PaginationLoop { endpoint: Endpoint, key: String, token: String },
    #[error("{endpoint} '{key}' exceeded {max} pages")]
    TooManyPages { endpoint: Endpoint, key: String, max: usize },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("interrupted")]
    Interrupted,
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CollectError + '_ {
    move |source| CollectError::Io { path: path.to_path_buf(), source }
}
