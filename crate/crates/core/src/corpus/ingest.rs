//! Streaming readers and canonical writers for the corpus file formats.
//!
//! * `channels.csv` – header `channel_id,category`
//! * `videos.jsonl` – `video_id, channel_id, title, description, published_at`
//! * `comments.jsonl` – `comment_id, video_id, user_id, published_at, label?, text?`
//! * `labels.csv` – header `comment_id,label`

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::time::{format_timestamp, parse_timestamp};
use super::{Category, Channel, Comment, Corpus, CorpusError, Video};
use crate::label::HateLabel;

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

fn parse_err(file: &str, line: u64, reason: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        file: file.to_string(),
        line,
        reason: reason.into(),
    }
}

/// Input locations for a full corpus load.
#[derive(Debug, Clone, Default)]
pub struct CorpusPaths {
    pub channels: PathBuf,
    pub videos: PathBuf,
    pub comments: PathBuf,
    pub labels: Option<PathBuf>,
    /// One channel id per line; listed channels become questionable.
    pub questionable_list: Option<PathBuf>,
}

impl CorpusPaths {
    pub fn load(&self) -> Result<(Corpus, Option<AttachSummary>), CorpusError> {
        let mut channels = parse_channels(open(&self.channels)?, &file_name(&self.channels))?;
        if let Some(list) = &self.questionable_list {
            let ids: HashSet<String> =
                parse_questionable_list(BufReader::new(open(list)?), &file_name(list))?
                    .into_iter()
                    .collect();
            for c in &mut channels {
                if ids.contains(&c.channel_id) {
                    c.category = Category::Questionable;
                }
            }
        }
        let videos = read_videos(BufReader::new(open(&self.videos)?), &file_name(&self.videos))?;
        let comments =
            read_comments(BufReader::new(open(&self.comments)?), &file_name(&self.comments))?;
        let corpus = Corpus::new(channels, videos, comments)?;
        match &self.labels {
            Some(path) => {
                let (corpus, summary) = attach_labels(corpus, path)?;
                Ok((corpus, Some(summary)))
            }
            None => Ok((corpus, None)),
        }
    }
}

/// Loads and validates a corpus from its three entity files.
pub fn load_corpus(
    channels_path: &Path,
    videos_path: &Path,
    comments_path: &Path,
) -> Result<Corpus, CorpusError> {
    CorpusPaths {
        channels: channels_path.to_path_buf(),
        videos: videos_path.to_path_buf(),
        comments: comments_path.to_path_buf(),
        ..Default::default()
    }
    .load()
    .map(|(c, _)| c)
}

#[derive(Debug, Deserialize)]
struct ChannelRow {
    channel_id: String,
    #[serde(default)]
    category: String,
}

pub fn parse_channels<R: Read>(reader: R, file: &str) -> Result<Vec<Channel>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(file, 1, e.to_string()))?
        .clone();
    if !headers.iter().any(|h| h == "channel_id") {
        return Err(parse_err(file, 1, "header must contain 'channel_id'"));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<ChannelRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(file, line, e.to_string())
        })?;
        let line = out.len() as u64 + 2;
        if row.channel_id.is_empty() {
            return Err(parse_err(file, line, "empty channel_id"));
        }
        let category = row
            .category
            .parse::<Category>()
            .map_err(|reason| parse_err(file, line, reason))?;
        out.push(Channel {
            channel_id: row.channel_id,
            category,
        });
    }
    Ok(out)
}

pub fn parse_questionable_list<R: BufRead>(reader: R, file: &str) -> Result<Vec<String>, CorpusError> {
    let mut ids = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| parse_err(file, i as u64 + 1, e.to_string()))?;
        let id = line.trim();
        if id.is_empty() || id.starts_with('#') || id == "channel_id" {
            continue;
        }
        ids.push(id.to_string());
    }
    Ok(ids)
}

#[derive(Debug, Serialize, Deserialize)]
struct VideoRecord {
    video_id: String,
    channel_id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    description: String,
    published_at: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CommentRecord {
    comment_id: String,
    video_id: String,
    user_id: String,
    published_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

fn non_empty(value: &str, field: &str, file: &str, line: u64) -> Result<(), CorpusError> {
    if value.is_empty() {
        Err(parse_err(file, line, format!("empty {field}")))
    } else {
        Ok(())
    }
}

pub fn parse_video_line(text: &str, file: &str, line: u64) -> Result<Video, CorpusError> {
    let rec: VideoRecord =
        serde_json::from_str(text).map_err(|e| parse_err(file, line, e.to_string()))?;
    non_empty(&rec.video_id, "video_id", file, line)?;
    non_empty(&rec.channel_id, "channel_id", file, line)?;
    let published_at =
        parse_timestamp(&rec.published_at).map_err(|reason| parse_err(file, line, reason))?;
    Ok(Video {
        video_id: rec.video_id,
        channel_id: rec.channel_id,
        title: rec.title,
        description: rec.description,
        published_at,
    })
}

pub fn parse_comment_line(text: &str, file: &str, line: u64) -> Result<Comment, CorpusError> {
    let rec: CommentRecord =
        serde_json::from_str(text).map_err(|e| parse_err(file, line, e.to_string()))?;
    non_empty(&rec.comment_id, "comment_id", file, line)?;
    non_empty(&rec.video_id, "video_id", file, line)?;
    let published_at =
        parse_timestamp(&rec.published_at).map_err(|reason| parse_err(file, line, reason))?;
    let label = match rec.label.as_deref() {
        None | Some("") => None,
        Some(tok) => Some(tok.parse::<HateLabel>().map_err(|e| CorpusError::InvalidLabel {
            file: file.to_string(),
            line,
            token: e.0,
        })?),
    };
    Ok(Comment {
        comment_id: rec.comment_id,
        video_id: rec.video_id,
        user_id: rec.user_id,
        published_at,
        label,
        text: rec.text,
    })
}

fn read_jsonl<R: BufRead, T>(
    mut reader: R,
    file: &str,
    parse: impl Fn(&str, &str, u64) -> Result<T, CorpusError>,
) -> Result<Vec<T>, CorpusError> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut line = 0u64;
    loop {
        buf.clear();
        let n = reader
            .read_line(&mut buf)
            .map_err(|e| parse_err(file, line + 1, e.to_string()))?;
        if n == 0 {
            break;
        }
        line += 1;
        let trimmed = buf.trim();
        if trimmed.is_empty() {
            continue;
        }
        out.push(parse(trimmed, file, line)?);
    }
    Ok(out)
}

pub fn read_videos<R: BufRead>(reader: R, file: &str) -> Result<Vec<Video>, CorpusError> {
    read_jsonl(reader, file, parse_video_line)
}

pub fn read_comments<R: BufRead>(reader: R, file: &str) -> Result<Vec<Comment>, CorpusError> {
    read_jsonl(reader, file, parse_comment_line)
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    comment_id: String,
    label: String,
}

/// Parses `labels.csv` rows; an invalid label token is an error naming the token.
pub fn parse_label_rows<R: Read>(reader: R, file: &str) -> Result<Vec<(String, HateLabel)>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<LabelRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(file, line, e.to_string())
        })?;
        let line = out.len() as u64 + 2;
        let label = row.label.parse::<HateLabel>().map_err(|e| CorpusError::InvalidLabel {
            file: file.to_string(),
            line,
            token: e.0,
        })?;
        out.push((row.comment_id, label));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct AttachSummary {
    /// Distinct comments that received a label.
    pub labeled: usize,
    /// Rows naming a comment id absent from the corpus (skipped).
    pub unknown: usize,
    /// Comments left without a label after attaching.
    pub unlabeled: usize,
}

/// Attaches `labels.csv` to the corpus, returning the relabeled corpus.
pub fn attach_labels(corpus: Corpus, labels_path: &Path) -> Result<(Corpus, AttachSummary), CorpusError> {
    let rows = parse_label_rows(open(labels_path)?, &file_name(labels_path))?;
    Ok(attach_label_rows(corpus, &rows))
}

pub(crate) fn attach_label_rows(corpus: Corpus, rows: &[(String, HateLabel)]) -> (Corpus, AttachSummary) {
    let mut labels = corpus.labels();
    let mut touched = vec![false; labels.len()];
    let mut summary = AttachSummary::default();
    for (id, label) in rows {
        match corpus.comment_index(id) {
            Some(i) => {
                labels[i] = Some(*label);
                touched[i] = true;
            }
            None => {
                if summary.unknown < 5 {
                    log::warn!("label for unknown comment '{id}' skipped");
                }
                summary.unknown += 1;
            }
        }
    }
    if summary.unknown > 5 {
        log::warn!("{} label rows referenced unknown comments", summary.unknown);
    }
    summary.labeled = touched.iter().filter(|&&t| t).count();
    let corpus = corpus.with_labels(&labels);
    summary.unlabeled = corpus.comments().len() - corpus.labeled_count();
    (corpus, summary)
}

pub fn write_channels<W: Write>(corpus: &Corpus, w: W) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["channel_id", "category"])?;
    for c in corpus.channels() {
        wtr.write_record([c.channel_id.as_str(), c.category.as_str()])?;
    }
    wtr.flush()
}

/// Canonical JSONL line (without newline) for one video.
pub fn video_line(v: &Video) -> String {
    let rec = VideoRecord {
        video_id: v.video_id.clone(),
        channel_id: v.channel_id.clone(),
        title: v.title.clone(),
        description: v.description.clone(),
        published_at: format_timestamp(v.published_at),
    };
    serde_json::to_string(&rec).expect("plain record serializes")
}

/// Canonical JSONL line (without newline) for one comment.
pub fn comment_line(c: &Comment) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        comment_id: &'a str,
        video_id: &'a str,
        user_id: &'a str,
        published_at: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        label: Option<&'static str>,
        #[serde(skip_serializing_if = "Option::is_none")]
        text: Option<&'a str>,
    }
    let rec = Out {
        comment_id: &c.comment_id,
        video_id: &c.video_id,
        user_id: &c.user_id,
        published_at: format_timestamp(c.published_at),
        label: c.label.map(HateLabel::code),
        text: c.text.as_deref(),
    };
    serde_json::to_string(&rec).expect("plain record serializes")
}

pub fn write_videos<W: Write>(corpus: &Corpus, mut w: W) -> io::Result<()> {
    for v in corpus.videos() {
        w.write_all(video_line(v).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_comments<W: Write>(corpus: &Corpus, mut w: W) -> io::Result<()> {
    for c in corpus.comments() {
        w.write_all(comment_line(c).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes `channels.csv`, `videos.jsonl` and `comments.jsonl` into `dir`.
pub fn write_canonical(corpus: &Corpus, dir: &Path) -> io::Result<CorpusPaths> {
    std::fs::create_dir_all(dir)?;
    let paths = CorpusPaths {
        channels: dir.join("channels.csv"),
        videos: dir.join("videos.jsonl"),
        comments: dir.join("comments.jsonl"),
        labels: None,
        questionable_list: None,
    };
    write_channels(corpus, BufWriter::new(File::create(&paths.channels)?))?;
    write_videos(corpus, BufWriter::new(File::create(&paths.videos)?))?;
    write_comments(corpus, BufWriter::new(File::create(&paths.comments)?))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHANNELS: &str = "channel_id,category\nch0,questionable\nch1,Reliable\n";
    const VIDEOS: &str = r#"{"video_id":"v0","channel_id":"ch0","title":"Covid update","description":"","published_at":"2020-02-01T00:00:00Z"}
{"video_id":"v1","channel_id":"ch1","title":"t","description":"d","published_at":"2020-02-02T00:00:00Z"}

{"video_id":"v2","channel_id":"ch1","title":"t","description":"d","published_at":"2020-02-03T00:00:00Z"}
"#;

    fn comments_jsonl(n: usize) -> String {
        (0..n)
            .map(|i| {
                format!(
                    r#"{{"comment_id":"c{i}","video_id":"v{}","user_id":"u{}","published_at":"2020-02-0{}T10:00:00Z"}}"#,
                    i % 3,
                    i % 2,
                    3 + i % 3
                ) + "\n"
            })
            .collect()
    }

    fn write_fixture(dir: &Path, comments: &str) -> CorpusPaths {
        std::fs::write(dir.join("channels.csv"), CHANNELS).unwrap();
        std::fs::write(dir.join("videos.jsonl"), VIDEOS).unwrap();
        std::fs::write(dir.join("comments.jsonl"), comments).unwrap();
        CorpusPaths {
            channels: dir.join("channels.csv"),
            videos: dir.join("videos.jsonl"),
            comments: dir.join("comments.jsonl"),
            ..Default::default()
        }
    }

    #[test]
    fn loads_counts() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_fixture(dir.path(), &comments_jsonl(5));
        let corpus = load_corpus(&p.channels, &p.videos, &p.comments).unwrap();
        assert_eq!(corpus.counts(), (2, 3, 5));
    }

    #[test]
    fn missing_published_at_reports_line() {
        let mut text = comments_jsonl(3);
        text.push_str(r#"{"comment_id":"c9","video_id":"v0","user_id":"u"}"#);
        let err = read_comments(text.as_bytes(), "comments.jsonl").unwrap_err();
        match err {
            CorpusError::Parse { line, reason, .. } => {
                assert_eq!(line, 4);
                assert!(reason.contains("published_at"), "{reason}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_video_is_dangling() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = comments_jsonl(2);
        text.push_str(r#"{"comment_id":"cx","video_id":"ghost","user_id":"u","published_at":"2020-02-05"}"#);
        let p = write_fixture(dir.path(), &text);
        let err = load_corpus(&p.channels, &p.videos, &p.comments).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn bad_category_and_label_tokens() {
        let err = parse_channels("channel_id,category\nx,shady\n".as_bytes(), "channels.csv").unwrap_err();
        assert!(err.to_string().contains("shady"));
        let err = parse_label_rows("comment_id,label\nc1,A\nc9,X\n".as_bytes(), "labels.csv").unwrap_err();
        match err {
            CorpusError::InvalidLabel { token, line, .. } => {
                assert_eq!(token, "X");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_category_defaults_to_reliable() {
        let ch = parse_channels("channel_id,category\nx,\n".as_bytes(), "c").unwrap();
        assert_eq!(ch[0].category, Category::Reliable);
        let ch = parse_channels("channel_id\ny\n".as_bytes(), "c").unwrap();
        assert_eq!(ch[0].category, Category::Reliable);
    }

    #[test]
    fn attach_labels_counts() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_fixture(dir.path(), &comments_jsonl(5));
        let corpus = load_corpus(&p.channels, &p.videos, &p.comments).unwrap();

        let all: Vec<_> = (0..5).map(|i| (format!("c{i}"), HateLabel::Appropriate)).collect();
        let (_, s) = attach_label_rows(corpus.clone(), &all);
        assert_eq!((s.labeled, s.unknown, s.unlabeled), (5, 0, 0));

        let mut partial: Vec<_> = (0..4).map(|i| (format!("c{i}"), HateLabel::Violent)).collect();
        partial.push(("nope".into(), HateLabel::Violent));
        let (labeled, s) = attach_label_rows(corpus, &partial);
        assert_eq!((s.labeled, s.unknown, s.unlabeled), (4, 1, 1));
        assert_eq!(labeled.comments().len(), 5);
    }

    #[test]
    fn questionable_list_overrides_category() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = write_fixture(dir.path(), &comments_jsonl(3));
        std::fs::write(dir.path().join("channels.csv"), "channel_id,category\nch0,\nch1,\n").unwrap();
        std::fs::write(dir.path().join("q.txt"), "# agency list\nch1\n").unwrap();
        p.questionable_list = Some(dir.path().join("q.txt"));
        let (corpus, _) = p.load().unwrap();
        assert_eq!(corpus.channels()[0].category, Category::Reliable);
        assert_eq!(corpus.channels()[1].category, Category::Questionable);
    }

    #[test]
    fn canonical_round_trip_is_bit_equal() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = comments_jsonl(5);
        text.push_str(r#"{"comment_id":"c7","video_id":"v1","user_id":"u","published_at":"2020-02-05T10:00:00.5+02:00","label":"O","text":"ciao \"tutti\""}"#);
        let p = write_fixture(dir.path(), &text);
        let first = load_corpus(&p.channels, &p.videos, &p.comments).unwrap();
        let out1 = write_canonical(&first, &dir.path().join("a")).unwrap();
        let second = load_corpus(&out1.channels, &out1.videos, &out1.comments).unwrap();
        assert_eq!(first, second);
        let out2 = write_canonical(&second, &dir.path().join("b")).unwrap();
        for (a, b) in [(&out1.channels, &out2.channels), (&out1.videos, &out2.videos), (&out1.comments, &out2.comments)] {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        }
    }
}
