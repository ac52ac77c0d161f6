//! Comment delays: hours between a video's publication and each comment.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::GroupKey;
use crate::corpus::{Category, Comment, Corpus, Video};
use crate::error::{require_labels, AnalysisError};
use crate::label::HateLabel;
use crate::seed;
use crate::stats::{mean, sample_sd, skewness, upper_trimmed_mean};

const SECONDS_PER_HOUR: f64 = 3600.0;

/// Delay in fractional hours, `None` when the comment predates its video.
pub fn comment_delay(comment: &Comment, video: &Video) -> Option<f64> {
    let secs = comment.published_at - video.published_at;
    (secs >= 0).then(|| secs as f64 / SECONDS_PER_HOUR)
}

/// Comments dropped from delay statistics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DelayQuality {
    pub comments: usize,
    pub negative_delays: usize,
    /// Up to ten offending comment ids, for inspection.
    pub examples: Vec<String>,
}

/// Per-comment delays in corpus order (`NaN` for excluded comments) plus the
/// exclusion report.
pub fn delays_of(corpus: &Corpus) -> (Vec<f64>, DelayQuality) {
    let mut quality = DelayQuality {
        comments: corpus.comments().len(),
        ..Default::default()
    };
    let delays = corpus
        .comments()
        .iter()
        .enumerate()
        .map(|(i, c)| match comment_delay(c, &corpus.videos()[corpus.video_of(i)]) {
            Some(h) => h,
            None => {
                quality.negative_delays += 1;
                if quality.examples.len() < 10 {
                    quality.examples.push(c.comment_id.clone());
                }
                f64::NAN
            }
        })
        .collect();
    (delays, quality)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    All,
    Label,
    Category,
    LabelAndCategory,
}

impl Grouping {
    fn needs_labels(self) -> bool {
        matches!(self, Grouping::Label | Grouping::LabelAndCategory)
    }

    pub fn keys(self) -> Vec<GroupKey> {
        let labels = || HateLabel::ALL.into_iter().map(Some);
        match self {
            Grouping::All => vec![GroupKey::ALL],
            Grouping::Label => labels().map(|label| GroupKey { label, category: None }).collect(),
            Grouping::Category => Category::ALL
                .into_iter()
                .map(|c| GroupKey { label: None, category: Some(c) })
                .collect(),
            Grouping::LabelAndCategory => Category::ALL
                .into_iter()
                .flat_map(|c| labels().map(move |label| GroupKey { label, category: Some(c) }))
                .collect(),
        }
    }
}

/// Mean, spread, skewness and upper-trimmed mean of one group's delays (hours).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayStats {
    pub group: String,
    pub n: usize,
    pub mu_cd: Option<f64>,
    /// Needs two observations.
    pub sigma_cd: Option<f64>,
    /// Needs three observations and nonzero spread.
    pub gamma_cd: Option<f64>,
    pub trimmed_mu_cd: Option<f64>,
    pub trim: f64,
}

impl DelayStats {
    fn of(group: String, xs: &[f64], trim: f64) -> Self {
        DelayStats {
            group,
            n: xs.len(),
            mu_cd: mean(xs),
            sigma_cd: sample_sd(xs),
            gamma_cd: skewness(xs),
            trimmed_mu_cd: upper_trimmed_mean(xs, trim),
            trim,
        }
    }

    /// Whether the spread or shape is undefined for this group.
    pub fn flagged(&self) -> bool {
        self.sigma_cd.is_none() || self.gamma_cd.is_none()
    }
}

fn group_delays(corpus: &Corpus, delays: &[f64], key: &GroupKey) -> Vec<f64> {
    corpus
        .comments()
        .iter()
        .enumerate()
        .filter(|(i, c)| !delays[*i].is_nan() && key.matches(c.label, corpus.comment_category(*i)))
        .map(|(i, _)| delays[i])
        .collect()
}

/// Delay statistics for every group of `grouping`, with the negative-delay report.
pub fn delay_stats(
    corpus: &Corpus,
    grouping: Grouping,
    trim: f64,
) -> Result<(Vec<DelayStats>, DelayQuality), AnalysisError> {
    if !(0.0..1.0).contains(&trim) {
        return Err(AnalysisError::InvalidParameter(format!("trim {trim} outside [0, 1)")));
    }
    if grouping.needs_labels() {
        require_labels(corpus, "delay statistics by label")?;
    }
    let (delays, quality) = delays_of(corpus);
    let stats = grouping
        .keys()
        .iter()
        .map(|key| DelayStats::of(key.name(), &group_delays(corpus, &delays, key), trim))
        .collect();
    Ok((stats, quality))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BootstrapConfig {
    pub sample_size: usize,
    pub repetitions: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            sample_size: 7_500,
            repetitions: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapStats {
    pub group: String,
    pub observations: usize,
    /// Mean of the repetition means (hours).
    pub mu_hat_cd: f64,
    /// Standard deviation of the repetition means (hours).
    pub sigma_hat_cd: f64,
    pub sample_size: usize,
    pub repetitions: usize,
}

/// Resamples `delays` with replacement; repetition `r` draws from its own
/// stream derived from `(seed, stream, r)`.
pub fn bootstrap_means(
    delays: &[f64],
    config: BootstrapConfig,
    seed: u64,
    stream: u64,
) -> Result<(f64, f64), AnalysisError> {
    if delays.is_empty() {
        return Err(AnalysisError::EmptyGroup("bootstrap".into()));
    }
    if config.repetitions == 0 || config.sample_size == 0 {
        return Err(AnalysisError::InvalidParameter(
            "bootstrap needs sample_size ≥ 1 and repetitions ≥ 1".into(),
        ));
    }
    let n = delays.len();
    let means: Vec<f64> = (0..config.repetitions as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::rng(seed, &[seed::tag("bootstrap"), stream, r]);
            let sum: f64 = (0..config.sample_size)
                .map(|_| delays[rng.random_range(0..n)])
                .sum();
            sum / config.sample_size as f64
        })
        .collect();
    let mu = mean(&means).expect("repetitions ≥ 1");
    let sigma = sample_sd(&means).unwrap_or(0.0);
    Ok((mu, sigma))
}

/// Bootstrap of the mean delay for one group of comments.
pub fn bootstrap_delay(
    corpus: &Corpus,
    key: GroupKey,
    config: BootstrapConfig,
    seed: u64,
) -> Result<BootstrapStats, AnalysisError> {
    if key.label.is_some() {
        require_labels(corpus, "bootstrap by label")?;
    }
    let (delays, _) = delays_of(corpus);
    let xs = group_delays(corpus, &delays, &key);
    if xs.is_empty() {
        return Err(AnalysisError::EmptyGroup(key.name()));
    }
    let (mu, sigma) = bootstrap_means(&xs, config, seed, key.stream_tag())?;
    Ok(BootstrapStats {
        group: key.name(),
        observations: xs.len(),
        mu_hat_cd: mu,
        sigma_hat_cd: sigma,
        sample_size: config.sample_size,
        repetitions: config.repetitions,
    })
}
