use std::collections::{BTreeSet, HashSet};
use std::fs::OpenOptions;
use std::io::{Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use super::client::{Client, Clock};
use super::{io_err, CollectError, DataSource, Endpoint};
use crate::corpus::{comment_line, Comment};

#[derive(Default, Clone, Copy)]
pub struct FetchOptions<'a> {
    /// Progress file; an existing one is resumed.
    pub checkpoint: Option<&'a Path>,
    /// Keeps a comment when it returns true (for example a language check).
    pub keep: Option<&'a (dyn Fn(&Comment) -> bool + Sync)>,
    /// Checked before each video; when set the fetch stops with `Interrupted`.
    pub cancel: Option<&'a AtomicBool>,
}

/// Progress of a comment download: the sink is valid up to `sink_len` bytes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchCheckpoint {
    pub completed: Vec<String>,
    pub sink_len: u64,
    pub written: u64,
}

impl FetchCheckpoint {
    fn load(path: &Path) -> Result<Self, CollectError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| CollectError::Checkpoint { path: path.to_path_buf(), reason: e.to_string() })
    }

    fn save(&self, path: &Path) -> Result<(), CollectError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec(self).expect("checkpoint serializes")).map_err(io_err(&tmp))?;
        std::fs::rename(&tmp, path).map_err(io_err(path))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FetchSummary {
    /// Comment lines in the sink, earlier runs included.
    pub written: u64,
    pub videos_completed: usize,
    /// Videos given up on after retries, with the reason.
    pub failed: Vec<(String, String)>,
    pub resumed: bool,
}

/// Streams every comment page of each video to `sink` as comments JSONL.
/// One video's comments are appended at once, after which the checkpoint
/// records the new valid sink length; resuming truncates anything past it.
pub fn fetch_comments<S: DataSource, C: Clock>(
    client: &mut Client<S, C>,
    video_ids: &[String],
    sink: &Path,
    options: FetchOptions<'_>,
) -> Result<FetchSummary, CollectError> {
    let (mut state, resumed) = match options.checkpoint.filter(|p| p.exists()) {
        Some(p) => (FetchCheckpoint::load(p)?, true),
        None => (FetchCheckpoint::default(), false),
    };
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(false)
        .open(sink)
        .map_err(io_err(sink))?;
    let actual = file.metadata().map_err(io_err(sink))?.len();
    if actual < state.sink_len {
        return Err(CollectError::Checkpoint {
            path: options.checkpoint.unwrap_or(sink).to_path_buf(),
            reason: format!("sink is shorter ({actual} bytes) than recorded ({})", state.sink_len),
        });
    }
    file.set_len(state.sink_len).map_err(io_err(sink))?;
    file.seek(SeekFrom::End(0)).map_err(io_err(sink))?;

    let mut done: BTreeSet<String> = state.completed.iter().cloned().collect();
    let mut summary = FetchSummary { resumed, ..FetchSummary::default() };
    for id in video_ids {
        if done.contains(id) {
            continue;
        }
        if options.cancel.is_some_and(|c| c.load(Ordering::SeqCst)) {
            return Err(CollectError::Interrupted);
        }
        let comments = match client.paginate(Endpoint::Comments, id, |s, t| s.comments(id, t)) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("skipping video {id}: {e}");
                summary.failed.push((id.clone(), e.to_string()));
                continue;
            }
        };
        let mut seen = HashSet::new();
        let mut buf = Vec::new();
        let mut n = 0u64;
        for mut c in comments {
            c.video_id.clone_from(id);
            if !seen.insert(c.comment_id.clone()) || options.keep.is_some_and(|keep| !keep(&c)) {
                continue;
            }
            buf.extend_from_slice(comment_line(&c).as_bytes());
            buf.push(b'\n');
            n += 1;
        }
        file.write_all(&buf).map_err(io_err(sink))?;
        file.flush().map_err(io_err(sink))?;
        file.sync_data().map_err(io_err(sink))?;
        state.sink_len += buf.len() as u64;
        state.written += n;
        state.completed.push(id.clone());
        done.insert(id.clone());
        if let Some(p) = options.checkpoint {
            state.save(p)?;
        }
    }
    summary.written = state.written;
    summary.videos_completed = state.completed.len();
    Ok(summary)
}
