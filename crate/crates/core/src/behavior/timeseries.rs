use serde::Serialize;

use crate::corpus::time::{day_start, week_start, DAY, WEEK};
use crate::corpus::{Category, Corpus, Timestamp};
use crate::error::{require_labels, AnalysisError};
use crate::label::HateLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinWidth {
    /// Monday-aligned UTC weeks.
    #[default]
    Week,
    Day,
}

impl BinWidth {
    fn start(self, t: Timestamp) -> Timestamp {
        match self {
            BinWidth::Week => week_start(t),
            BinWidth::Day => day_start(t),
        }
    }

    fn seconds(self) -> i64 {
        match self {
            BinWidth::Week => WEEK,
            BinWidth::Day => DAY,
        }
    }
}

impl std::str::FromStr for BinWidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "week" | "weekly" => Ok(BinWidth::Week),
            "day" | "daily" => Ok(BinWidth::Day),
            other => Err(format!("unknown bin width '{other}' (expected week or day)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelTimeBin {
    pub start: Timestamp,
    /// Comment counts in label order A, I, O, V.
    pub counts: [u64; 4],
    /// `None` for bins without comments.
    pub proportions: Option<[f64; 4]>,
}

impl LabelTimeBin {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Label proportions per contiguous time bin, from the bin of the first
/// comment to the bin of the last; `category` restricts to one channel class.
pub fn label_timeseries(
    corpus: &Corpus,
    width: BinWidth,
    category: Option<Category>,
) -> Result<Vec<LabelTimeBin>, AnalysisError> {
    require_labels(corpus, "label time series")?;
    let selected: Vec<(Timestamp, HateLabel)> = corpus
        .comments()
        .iter()
        .enumerate()
        .filter(|(i, _)| category.is_none_or(|c| corpus.comment_category(*i) == c))
        .map(|(_, c)| (c.published_at, c.label.expect("checked labeled")))
        .collect();
    let Some(first) = selected.iter().map(|s| s.0).min() else {
        return Ok(Vec::new());
    };
    let last = selected.iter().map(|s| s.0).max().expect("non-empty");
    let origin = width.start(first);
    let n_bins = ((width.start(last) - origin) / width.seconds()) as usize + 1;

    let mut counts = vec![[0u64; 4]; n_bins];
    for (t, label) in selected {
        let b = ((width.start(t) - origin) / width.seconds()) as usize;
        counts[b][label.index()] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(b, counts)| {
            let total: u64 = counts.iter().sum();
            let proportions = (total > 0).then(|| counts.map(|c| c as f64 / total as f64));
            LabelTimeBin {
                start: origin + b as i64 * width.seconds(),
                counts,
                proportions,
            }
        })
        .collect())
}
