use serde::Serialize;

use super::{Category, Corpus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownRow {
    /// `None` for the total row.
    pub category: Option<Category>,
    pub channels: u64,
    pub videos: u64,
    pub comments: u64,
    pub channel_pct: f64,
    pub video_pct: f64,
    pub comment_pct: f64,
}

impl BreakdownRow {
    pub fn name(&self) -> &'static str {
        self.category.map_or("total", Category::as_str)
    }
}

/// Channel/video/comment counts per category with column percentages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownTable {
    pub reliable: BreakdownRow,
    pub questionable: BreakdownRow,
    pub total: BreakdownRow,
}

fn pct(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub fn breakdown(corpus: &Corpus) -> BreakdownTable {
    // [questionable, reliable]
    let mut channels = [0u64; 2];
    let mut videos = [0u64; 2];
    let mut comments = [0u64; 2];
    let slot = |c: Category| match c {
        Category::Questionable => 0,
        Category::Reliable => 1,
    };
    for c in corpus.channels() {
        channels[slot(c.category)] += 1;
    }
    for v in 0..corpus.videos().len() {
        videos[slot(corpus.video_category(v))] += 1;
    }
    let mut per_video = vec![0u64; corpus.videos().len()];
    for i in 0..corpus.comments().len() {
        per_video[corpus.video_of(i)] += 1;
    }
    for (v, n) in per_video.iter().enumerate() {
        comments[slot(corpus.video_category(v))] += n;
    }
    BreakdownTable::from_counts(channels, videos, comments)
}

impl BreakdownTable {
    /// Builds the table from `[questionable, reliable]` counts per column.
    pub fn from_counts(channels: [u64; 2], videos: [u64; 2], comments: [u64; 2]) -> Self {
        let totals = [
            channels[0] + channels[1],
            videos[0] + videos[1],
            comments[0] + comments[1],
        ];
        let row = |category: Option<Category>, i: usize| {
            let (ch, vi, co) = match i {
                2 => (totals[0], totals[1], totals[2]),
                _ => (channels[i], videos[i], comments[i]),
            };
            BreakdownRow {
                category,
                channels: ch,
                videos: vi,
                comments: co,
                channel_pct: pct(ch, totals[0]),
                video_pct: pct(vi, totals[1]),
                comment_pct: pct(co, totals[2]),
            }
        };
        BreakdownTable {
            questionable: row(Some(Category::Questionable), 0),
            reliable: row(Some(Category::Reliable), 1),
            total: row(None, 2),
        }
    }

    pub fn rows(&self) -> [&BreakdownRow; 3] {
        [&self.reliable, &self.questionable, &self.total]
    }

    /// Plain-text rendering with thousands separators and one-decimal percentages.
    pub fn render(&self) -> String {
        let mut out = format!("{:<13}{:>12}{:>12}{:>14}\n", "", "Channels", "Videos", "Comments");
        for r in self.rows() {
            out.push_str(&format!(
                "{:<13}{:>12}{:>12}{:>14}\n",
                r.name(),
                thousands(r.channels),
                thousands(r.videos),
                thousands(r.comments)
            ));
            out.push_str(&format!(
                "{:<13}{:>12}{:>12}{:>14}\n",
                "",
                format_pct(r.channel_pct),
                format_pct(r.video_pct),
                format_pct(r.comment_pct)
            ));
        }
        out
    }
}

pub fn format_pct(p: f64) -> String {
    format!("{p:.1} %")
}

pub fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
