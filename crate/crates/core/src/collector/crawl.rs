use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::client::{Client, Clock};
use super::{io_err, CollectError, DataSource, Endpoint, TimeWindow};
use crate::corpus::Video;

/// All pages of every keyword's search, deduplicated by video id, restricted
/// to the window and sorted by id.
pub fn search_videos<S: DataSource, C: Clock>(
    client: &mut Client<S, C>,
    keywords: &[String],
    window: &TimeWindow,
) -> Result<Vec<Video>, CollectError> {
    if keywords.is_empty() {
        return Err(CollectError::Invalid("at least one keyword is required".into()));
    }
    let mut found = BTreeMap::new();
    for keyword in keywords {
        let items = client.paginate(Endpoint::Search, keyword, |s, t| s.search(keyword, window, t))?;
        log::info!("search '{keyword}': {} results", items.len());
        for v in items {
            if window.contains(v.published_at) {
                found.entry(v.video_id.clone()).or_insert(v);
            }
        }
    }
    Ok(found.into_values().collect())
}

/// Videos whose title or description contains a keyword, ignoring case.
pub fn filter_matching(videos: &[Video], keywords: &[String]) -> Vec<Video> {
    let needles: Vec<String> = keywords.iter().map(|k| k.to_lowercase()).collect();
    videos
        .iter()
        .filter(|v| {
            let title = v.title.to_lowercase();
            let description = v.description.to_lowercase();
            needles.iter().any(|k| title.contains(k.as_str()) || description.contains(k.as_str()))
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlLimits {
    pub max_depth: u32,
    /// Cap on the number of videos visited, seeds included.
    pub max_videos: Option<usize>,
}

/// Breadth-first crawl progress, serializable as a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlState {
    pub limits: CrawlLimits,
    pub frontier: VecDeque<String>,
    pub visited: BTreeSet<String>,
    /// Depth of every id ever queued.
    pub depth: BTreeMap<String, u32>,
    pub videos: BTreeMap<String, Video>,
}

impl CrawlState {
    pub fn new(seeds: &[Video], limits: CrawlLimits) -> Self {
        let mut state = CrawlState {
            limits,
            frontier: VecDeque::new(),
            visited: BTreeSet::new(),
            depth: BTreeMap::new(),
            videos: BTreeMap::new(),
        };
        for v in seeds {
            state.enqueue(v.clone(), 0);
        }
        state
    }

    fn has_room(&self) -> bool {
        self.limits.max_videos.is_none_or(|m| self.depth.len() < m)
    }

    fn enqueue(&mut self, video: Video, depth: u32) {
        if self.depth.contains_key(&video.video_id) || !self.has_room() {
            return;
        }
        self.depth.insert(video.video_id.clone(), depth);
        self.frontier.push_back(video.video_id.clone());
        self.videos.insert(video.video_id.clone(), video);
    }

    pub fn is_done(&self) -> bool {
        self.frontier.is_empty()
    }

    /// No id is both visited and waiting.
    pub fn is_consistent(&self) -> bool {
        self.frontier.iter().all(|id| !self.visited.contains(id))
            && self.visited.len() + self.frontier.len() == self.depth.len()
    }

    /// Visits the next queued video, expanding its related videos when it
    /// is shallower than the depth limit.
    pub fn step<S: DataSource, C: Clock>(&mut self, client: &mut Client<S, C>) -> Result<(), CollectError> {
        let Some(id) = self.frontier.front().cloned() else {
            return Ok(());
        };
        let d = self.depth[&id];
        let related = if d < self.limits.max_depth {
            client.paginate(Endpoint::Related, &id, |s, t| s.related(&id, t))?
        } else {
            Vec::new()
        };
        self.frontier.pop_front();
        self.visited.insert(id);
        for v in related {
            self.enqueue(v, d + 1);
        }
        Ok(())
    }

    /// Visited videos sorted by id.
    pub fn result(&self) -> Vec<Video> {
        self.visited.iter().map(|id| self.videos[id].clone()).collect()
    }

    pub fn load(path: &Path) -> Result<Self, CollectError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let state: CrawlState = serde_json::from_str(&text)
            .map_err(|e| CollectError::Checkpoint { path: path.to_path_buf(), reason: e.to_string() })?;
        if !state.is_consistent() || state.frontier.iter().any(|id| !state.videos.contains_key(id)) {
            return Err(CollectError::Checkpoint { path: path.to_path_buf(), reason: "inconsistent crawl state".into() });
        }
        Ok(state)
    }

    pub fn save(&self, path: &Path) -> Result<(), CollectError> {
        let tmp = path.with_extension("tmp");
        let text = serde_json::to_string(self).expect("state serializes");
        std::fs::write(&tmp, text).map_err(io_err(&tmp))?;
        std::fs::rename(&tmp, path).map_err(io_err(path))
    }
}

/// Breadth-first expansion of related videos from `seeds`. With a
/// checkpoint path, progress is saved after every visit and an existing
/// checkpoint is resumed.
pub fn crawl_related<S: DataSource, C: Clock>(
    client: &mut Client<S, C>,
    seeds: &[Video],
    limits: CrawlLimits,
    checkpoint: Option<&Path>,
) -> Result<Vec<Video>, CollectError> {
    let mut state = match checkpoint.filter(|p| p.exists()) {
        Some(p) => {
            let s = CrawlState::load(p)?;
            if s.limits != limits {
                return Err(CollectError::Checkpoint {
                    path: p.to_path_buf(),
                    reason: "crawl limits differ from the checkpoint".into(),
                });
            }
            s
        }
        None => {
            if seeds.is_empty() {
                return Err(CollectError::Invalid("at least one seed video is required".into()));
            }
            CrawlState::new(seeds, limits)
        }
    };
    while !state.is_done() {
        state.step(client)?;
        if let Some(p) = checkpoint {
            state.save(p)?;
        }
    }
    Ok(state.result())
}
