use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Category, Corpus};
use crate::error::{require_labels, AnalysisError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationPoint {
    /// 1-based rank by descending comment count.
    pub rank: usize,
    pub channel_id: String,
    pub comments: u64,
    /// Fraction of ranked channels at or above this rank.
    pub channel_share: f64,
    /// Cumulative fraction of all comments.
    pub comment_share: f64,
    /// Cumulative fraction of each label's comments (A, I, O, V); `None` for
    /// labels absent from the corpus or when per-label curves were not requested.
    pub label_share: Option<[Option<f64>; 4]>,
    /// Fraction of the questionable channels found at or above this rank.
    pub questionable_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationCurve {
    pub points: Vec<ConcentrationPoint>,
    /// Channels without comments, left out of the ranking.
    pub silent_channels: usize,
}

impl ConcentrationCurve {
    /// Comment share held by the top `fraction` of channels, interpolating
    /// linearly between ranks.
    pub fn comment_share_at(&self, fraction: f64) -> f64 {
        let n = self.points.len();
        if n == 0 || fraction <= 0.0 {
            return 0.0;
        }
        let pos = (fraction.min(1.0) * n as f64).min(n as f64);
        let k = pos.floor() as usize;
        let below = if k == 0 { 0.0 } else { self.points[k - 1].comment_share };
        if k == n {
            return below;
        }
        below + (pos - k as f64) * (self.points[k].comment_share - below)
    }
}

/// Ranks commented channels by comment count (ties by channel id) and
/// accumulates comment, label and questionable-channel shares.
pub fn concentration_curve(corpus: &Corpus, per_label: bool) -> Result<ConcentrationCurve, AnalysisError> {
    if per_label {
        require_labels(corpus, "per-label concentration curves")?;
    }
    let n_channels = corpus.channels().len();
    let per_channel = (0..corpus.comments().len())
        .into_par_iter()
        .fold(
            || vec![[0u64; 5]; n_channels],
            |mut acc, i| {
                let ch = corpus.channel_of(corpus.video_of(i));
                acc[ch][0] += 1;
                if let Some(l) = corpus.comments()[i].label {
                    acc[ch][1 + l.index()] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![[0u64; 5]; n_channels],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for k in 0..5 {
                        x[k] += y[k];
                    }
                }
                a
            },
        );

    let mut ranked: Vec<usize> = (0..n_channels).filter(|&c| per_channel[c][0] > 0).collect();
    ranked.sort_by(|&a, &b| {
        per_channel[b][0]
            .cmp(&per_channel[a][0])
            .then_with(|| corpus.channels()[a].channel_id.cmp(&corpus.channels()[b].channel_id))
    });

    let totals = per_channel.iter().fold([0u64; 5], |mut t, c| {
        for k in 0..5 {
            t[k] += c[k];
        }
        t
    });
    let total_questionable = corpus
        .channels()
        .iter()
        .filter(|c| c.category == Category::Questionable)
        .count();

    let n = ranked.len();
    let mut cum = [0u64; 5];
    let mut questionable = 0usize;
    let points = ranked
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            for k in 0..5 {
                cum[k] += per_channel[c][k];
            }
            let channel = &corpus.channels()[c];
            questionable += (channel.category == Category::Questionable) as usize;
            let label_share = per_label.then(|| {
                std::array::from_fn(|l| (totals[1 + l] > 0).then(|| cum[1 + l] as f64 / totals[1 + l] as f64))
            });
            ConcentrationPoint {
                rank: r + 1,
                channel_id: channel.channel_id.clone(),
                comments: per_channel[c][0],
                channel_share: (r + 1) as f64 / n as f64,
                comment_share: cum[0] as f64 / totals[0] as f64,
                label_share,
                questionable_share: (total_questionable > 0)
                    .then(|| questionable as f64 / total_questionable as f64),
            }
        })
        .collect();
    Ok(ConcentrationCurve {
        points,
        silent_channels: n_channels - n,
    })
}
