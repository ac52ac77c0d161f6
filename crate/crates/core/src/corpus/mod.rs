//! Canonical data model for channels, videos and comments.
//!
//! A [`Corpus`] is immutable once built. Entities are kept sorted by id, which
//! gives a canonical order for serialization and binary-search lookups, and
//! every comment→video→channel reference is resolved to an index at build time.

mod breakdown;
mod ingest;
pub mod time;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::label::HateLabel;

pub use breakdown::{breakdown, BreakdownRow, BreakdownTable};
pub use ingest::{
    attach_labels, comment_line, load_corpus, parse_channels, parse_comment_line, parse_label_rows,
    parse_questionable_list, parse_video_line, read_comments, read_videos, video_line, write_canonical,
    write_channels, write_comments, write_videos, AttachSummary, CorpusPaths,
};

/// UTC timestamp in whole seconds since the Unix epoch.
pub type Timestamp = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Questionable,
    Reliable,
}

impl Category {
    pub const ALL: [Category; 2] = [Category::Questionable, Category::Reliable];

    pub const fn as_str(self) -> &'static str {
        match self {
            Category::Questionable => "questionable",
            Category::Reliable => "reliable",
        }
    }

    pub const fn opposite(self) -> Category {
        match self {
            Category::Questionable => Category::Reliable,
            Category::Reliable => Category::Questionable,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("questionable") {
            Ok(Category::Questionable)
        } else if t.eq_ignore_ascii_case("reliable") || t.is_empty() {
            Ok(Category::Reliable)
        } else {
            Err(format!("unknown category '{t}' (expected questionable or reliable)"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub channel_id: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Video {
    pub video_id: String,
    pub channel_id: String,
    pub title: String,
    pub description: String,
    pub published_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub comment_id: String,
    pub video_id: String,
    pub user_id: String,
    pub published_at: Timestamp,
    pub label: Option<HateLabel>,
    /// Withheld in distributed data sets.
    pub text: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Channel,
    Video,
    Comment,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Channel => "channel",
            EntityKind::Video => "video",
            EntityKind::Comment => "comment",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {reason}")]
    Parse {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("{file}:{line}: invalid label token '{token}'")]
    InvalidLabel {
        file: String,
        line: u64,
        token: String,
    },
    #[error("empty {kind} id")]
    EmptyId { kind: EntityKind },
    #[error("duplicate {kind} id '{id}'")]
    DuplicateId { kind: EntityKind, id: String },
    #[error("{kind} '{id}' references unknown {target} '{missing}'")]
    DanglingReference {
        kind: EntityKind,
        id: String,
        target: EntityKind,
        missing: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    channels: Vec<Channel>,
    videos: Vec<Video>,
    comments: Vec<Comment>,
    video_channel: Vec<u32>,
    comment_video: Vec<u32>,
}

impl Corpus {
    /// Validates ids and references and returns the canonical (id-sorted) corpus.
    pub fn new(
        mut channels: Vec<Channel>,
        mut videos: Vec<Video>,
        mut comments: Vec<Comment>,
    ) -> Result<Self, CorpusError> {
        channels.sort_unstable_by(|a, b| a.channel_id.cmp(&b.channel_id));
        videos.sort_unstable_by(|a, b| a.video_id.cmp(&b.video_id));
        comments.sort_unstable_by(|a, b| a.comment_id.cmp(&b.comment_id));

        check_unique(channels.iter().map(|c| c.channel_id.as_str()), EntityKind::Channel)?;
        check_unique(videos.iter().map(|v| v.video_id.as_str()), EntityKind::Video)?;
        check_unique(comments.iter().map(|c| c.comment_id.as_str()), EntityKind::Comment)?;
        if channels.iter().any(|c| c.channel_id.is_empty()) {
            return Err(CorpusError::EmptyId {
                kind: EntityKind::Channel,
            });
        }

        let mut video_channel = Vec::with_capacity(videos.len());
        for v in &videos {
            let idx = channels
                .binary_search_by(|c| c.channel_id.as_str().cmp(&v.channel_id))
                .map_err(|_| CorpusError::DanglingReference {
                    kind: EntityKind::Video,
                    id: v.video_id.clone(),
                    target: EntityKind::Channel,
                    missing: v.channel_id.clone(),
                })?;
            video_channel.push(idx as u32);
        }
        let mut comment_video = Vec::with_capacity(comments.len());
        for c in &comments {
            let idx = videos
                .binary_search_by(|v| v.video_id.as_str().cmp(&c.video_id))
                .map_err(|_| CorpusError::DanglingReference {
                    kind: EntityKind::Comment,
                    id: c.comment_id.clone(),
                    target: EntityKind::Video,
                    missing: c.video_id.clone(),
                })?;
            comment_video.push(idx as u32);
        }
        Ok(Corpus {
            channels,
            videos,
            comments,
            video_channel,
            comment_video,
        })
    }

    pub fn empty() -> Self {
        Corpus {
            channels: Vec::new(),
            videos: Vec::new(),
            comments: Vec::new(),
            video_channel: Vec::new(),
            comment_video: Vec::new(),
        }
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn videos(&self) -> &[Video] {
        &self.videos
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.channels.len(), self.videos.len(), self.comments.len())
    }

    pub fn channel_index(&self, channel_id: &str) -> Option<usize> {
        self.channels
            .binary_search_by(|c| c.channel_id.as_str().cmp(channel_id))
            .ok()
    }

    pub fn video_index(&self, video_id: &str) -> Option<usize> {
        self.videos
            .binary_search_by(|v| v.video_id.as_str().cmp(video_id))
            .ok()
    }

    pub fn comment_index(&self, comment_id: &str) -> Option<usize> {
        self.comments
            .binary_search_by(|c| c.comment_id.as_str().cmp(comment_id))
            .ok()
    }

    /// Index of the video a comment belongs to.
    pub fn video_of(&self, comment: usize) -> usize {
        self.comment_video[comment] as usize
    }

    /// Index of the channel a video belongs to.
    pub fn channel_of(&self, video: usize) -> usize {
        self.video_channel[video] as usize
    }

    pub fn video_category(&self, video: usize) -> Category {
        self.channels[self.channel_of(video)].category
    }

    pub fn comment_category(&self, comment: usize) -> Category {
        self.video_category(self.video_of(comment))
    }

    /// Seconds between the comment and the publication of its video.
    pub fn delay_seconds(&self, comment: usize) -> i64 {
        self.comments[comment].published_at - self.videos[self.video_of(comment)].published_at
    }

    /// Comment indices grouped by video index.
    pub fn comments_by_video(&self) -> Vec<Vec<u32>> {
        let mut groups = vec![Vec::new(); self.videos.len()];
        for (i, &v) in self.comment_video.iter().enumerate() {
            groups[v as usize].push(i as u32);
        }
        groups
    }

    /// `[min, max]` over comment timestamps.
    pub fn time_window(&self) -> Option<(Timestamp, Timestamp)> {
        let mut it = self.comments.iter().map(|c| c.published_at);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), t| (lo.min(t), hi.max(t))))
    }

    pub fn labeled_count(&self) -> usize {
        self.comments.iter().filter(|c| c.label.is_some()).count()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.comments.iter().all(|c| c.label.is_some())
    }

    /// Labels in comment order.
    pub fn labels(&self) -> Vec<Option<HateLabel>> {
        self.comments.iter().map(|c| c.label).collect()
    }

    /// Replaces every comment's label. `labels` is in comment order.
    pub fn with_labels(mut self, labels: &[Option<HateLabel>]) -> Self {
        assert_eq!(labels.len(), self.comments.len(), "one label slot per comment");
        for (c, l) in self.comments.iter_mut().zip(labels) {
            c.label = *l;
        }
        self
    }

    /// Sub-corpus of the videos (and their channels and comments) matching `keep`.
    pub fn filter_videos(&self, mut keep: impl FnMut(&Video, Category) -> bool) -> Corpus {
        let kept: Vec<bool> = (0..self.videos.len())
            .map(|i| keep(&self.videos[i], self.video_category(i)))
            .collect();
        let mut channel_used = vec![false; self.channels.len()];
        for (i, &k) in kept.iter().enumerate() {
            if k {
                channel_used[self.channel_of(i)] = true;
            }
        }
        let channels = self
            .channels
            .iter()
            .zip(&channel_used)
            .filter(|(_, &u)| u)
            .map(|(c, _)| c.clone())
            .collect();
        let videos = self
            .videos
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v.clone())
            .collect();
        let comments = self
            .comments
            .iter()
            .zip(&self.comment_video)
            .filter(|(_, &v)| kept[v as usize])
            .map(|(c, _)| c.clone())
            .collect();
        Corpus::new(channels, videos, comments).expect("sub-corpus of a valid corpus is valid")
    }
}

fn check_unique<'a>(
    sorted_ids: impl Iterator<Item = &'a str>,
    kind: EntityKind,
) -> Result<(), CorpusError> {
    let mut prev: Option<&str> = None;
    for id in sorted_ids {
        if prev == Some(id) {
            return Err(CorpusError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
        prev = Some(id);
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn small() -> (Vec<Channel>, Vec<Video>, Vec<Comment>) {
        (
            vec![channel("ch1", Category::Reliable), channel("ch0", Category::Questionable)],
            vec![video("v1", "ch1", 0), video("v0", "ch0", 10), video("v2", "ch1", 20)],
            (0..5)
                .map(|i| comment(&format!("c{i}"), ["v0", "v1", "v2"][i % 3], "u", 100 + i as i64, None))
                .collect(),
        )
    }

    #[test]
    fn builds_sorted_and_resolved() {
        let (ch, v, c) = small();
        let corpus = Corpus::new(ch, v, c).unwrap();
        assert_eq!(corpus.counts(), (2, 3, 5));
        assert_eq!(corpus.channels()[0].channel_id, "ch0");
        let i = corpus.comment_index("c0").unwrap();
        assert_eq!(corpus.videos()[corpus.video_of(i)].video_id, "v0");
        assert_eq!(corpus.comment_category(i), Category::Questionable);
        assert_eq!(corpus.time_window(), Some((100, 104)));
    }

    #[test]
    fn dangling_video_reference_names_the_id() {
        let (ch, v, mut c) = small();
        c[2].video_id = "nope".into();
        let err = Corpus::new(ch, v, c).unwrap_err();
        match err {
            CorpusError::DanglingReference { missing, .. } => assert_eq!(missing, "nope"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_comment_rejected() {
        let (ch, v, mut c) = small();
        c[1].comment_id = "c0".into();
        assert!(matches!(
            Corpus::new(ch, v, c),
            Err(CorpusError::DuplicateId { kind: EntityKind::Comment, .. })
        ));
    }

    #[test]
    fn filter_videos_keeps_references_valid() {
        let (ch, v, c) = small();
        let corpus = Corpus::new(ch, v, c).unwrap();
        let q = corpus.filter_videos(|_, cat| cat == Category::Questionable);
        assert_eq!(q.counts(), (1, 1, 2));
    }

    proptest! {
        // Breaking any single reference is always detected.
        #[test]
        fn broken_reference_always_detected(
            n_ch in 1usize..4, n_v in 1usize..6, n_c in 1usize..20,
            which in any::<prop::sample::Index>(), break_video in any::<bool>(),
        ) {
            let channels: Vec<_> = (0..n_ch).map(|i| channel(&format!("ch{i}"), Category::Reliable)).collect();
            let mut videos: Vec<_> = (0..n_v).map(|i| video(&format!("v{i}"), &format!("ch{}", i % n_ch), 0)).collect();
            let mut comments: Vec<_> = (0..n_c)
                .map(|i| comment(&format!("c{i}"), &format!("v{}", i % n_v), "u", 1, None))
                .collect();
            if break_video {
                videos[which.index(n_v)].channel_id = "missing".into();
            } else {
                comments[which.index(n_c)].video_id = "missing".into();
            }
            let is_dangling = matches!(
                Corpus::new(channels, videos, comments),
                Err(CorpusError::DanglingReference { .. })
            );
            prop_assert!(is_dangling);
        }
    }
}
