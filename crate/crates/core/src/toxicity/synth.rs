//! Synthetic labeled corpora with planted, known structure.
//!
//! Discussion lengths follow a discrete power law capped at `max_length`
//! (`P(L ≥ p) = p^-α`), so the cap carries a point mass and the longest
//! discussion is almost surely at the cap. Label probabilities start from
//! `label_rates` and shift mass from Appropriate to the other labels, in
//! proportion to their base rates, by `s = log_position·ln p + delay_per_hour·d`.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, LogNormal, Pareto};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::log_edges;
use super::ols_fit;
use crate::corpus::time::{parse_timestamp, DAY};
use crate::corpus::{Category, Channel, Comment, Corpus, Video};
use crate::label::HateLabel;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub questionable_channels: usize,
    pub reliable_channels: usize,
    /// Pareto shape of the per-channel video weights.
    pub channel_tail_exponent: f64,
    /// Total number of comments.
    pub comments: usize,
    pub discussion: DiscussionSpec,
    /// Base probabilities of A, I, O, V.
    pub label_rates: [f64; 4],
    pub escalation: EscalationSpec,
    pub delays: DelaySpec,
    pub users: UserSpec,
    /// First possible video publication time (RFC 3339).
    pub start: String,
    pub span_days: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscussionSpec {
    pub tail_exponent: f64,
    pub max_length: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscalationSpec {
    /// Shift per unit of ln(position).
    pub log_position: f64,
    /// Shift per hour of delay.
    pub delay_per_hour: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelaySpec {
    /// Mean of the log-normal delay distribution, in hours.
    pub mean_hours: f64,
    /// Log-scale standard deviation.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaningComponent {
    pub weight: f64,
    /// Preference for questionable videos, in `[0, 1]`.
    pub leaning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserSpec {
    pub count: usize,
    /// Pareto shape of per-user activity.
    pub activity_tail_exponent: f64,
    pub mixture: Vec<LeaningComponent>,
    /// Share of users who switch to `crossing_rates` on the other side.
    pub crossing_fraction: f64,
    pub crossing_rates: [f64; 4],
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            questionable_channels: 10,
            reliable_channels: 190,
            channel_tail_exponent: 0.9,
            comments: 100_000,
            discussion: DiscussionSpec::default(),
            label_rates: [0.78, 0.07, 0.12, 0.03],
            escalation: EscalationSpec::default(),
            delays: DelaySpec::default(),
            users: UserSpec::default(),
            start: "2020-01-06T00:00:00Z".into(),
            span_days: 120,
        }
    }
}

impl Default for DiscussionSpec {
    fn default() -> Self {
        DiscussionSpec { tail_exponent: 1.0, max_length: 1000 }
    }
}

impl Default for EscalationSpec {
    fn default() -> Self {
        EscalationSpec { log_position: 0.0, delay_per_hour: 0.0 }
    }
}

impl Default for DelaySpec {
    fn default() -> Self {
        DelaySpec { mean_hours: 120.0, sigma: 1.5 }
    }
}

impl Default for UserSpec {
    fn default() -> Self {
        UserSpec {
            count: 20_000,
            activity_tail_exponent: 1.5,
            mixture: vec![
                LeaningComponent { weight: 0.85, leaning: 0.05 },
                LeaningComponent { weight: 0.15, leaning: 0.85 },
            ],
            crossing_fraction: 0.0,
            crossing_rates: [0.15, 0.25, 0.4, 0.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::Invalid(msg.into())
}

fn check_rates(name: &str, rates: &[f64; 4]) -> Result<(), SynthError> {
    if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {rates:?}")));
    }
    let sum: f64 = rates.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("{name} must sum to 1, got {sum}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), SynthError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.questionable_channels + self.reliable_channels == 0 {
            return Err(invalid("at least one channel is required"));
        }
        if self.comments == 0 {
            return Err(invalid("comments must be at least 1"));
        }
        if self.discussion.max_length == 0 {
            return Err(invalid("discussion.max_length must be at least 1"));
        }
        if self.users.count == 0 {
            return Err(invalid("users.count must be at least 1"));
        }
        positive("channel_tail_exponent", self.channel_tail_exponent)?;
        positive("discussion.tail_exponent", self.discussion.tail_exponent)?;
        positive("delays.mean_hours", self.delays.mean_hours)?;
        positive("delays.sigma", self.delays.sigma)?;
        positive("users.activity_tail_exponent", self.users.activity_tail_exponent)?;
        check_rates("label_rates", &self.label_rates)?;
        check_rates("users.crossing_rates", &self.users.crossing_rates)?;
        if !(0.0..=1.0).contains(&self.users.crossing_fraction) {
            return Err(invalid("users.crossing_fraction must lie in [0, 1]"));
        }
        if self.users.mixture.is_empty()
            || self.users.mixture.iter().any(|c| !(0.0..=1.0).contains(&c.leaning) || c.weight.is_nan() || c.weight < 0.0)
            || self.users.mixture.iter().map(|c| c.weight).sum::<f64>() <= 0.0
        {
            return Err(invalid("users.mixture needs non-negative weights (not all zero) and leanings in [0, 1]"));
        }
        for (name, v) in [("log_position", self.escalation.log_position), ("delay_per_hour", self.escalation.delay_per_hour)] {
            if !v.is_finite() {
                return Err(invalid(format!("escalation.{name} must be finite")));
            }
        }
        let ra = self.label_rates[0];
        let reach = self.escalation.log_position * f64::from(self.discussion.max_length).ln();
        if reach > ra + 1e-12 || reach < ra - 1.0 - 1e-12 {
            return Err(invalid(format!(
                "escalation.log_position {} moves P(A) outside [0, 1] by position {}",
                self.escalation.log_position, self.discussion.max_length
            )));
        }
        if ra >= 1.0 && (self.escalation.log_position != 0.0 || self.escalation.delay_per_hour != 0.0) {
            return Err(invalid("escalation needs non-appropriate base rates to shift mass into"));
        }
        parse_timestamp(&self.start).map_err(|e| invalid(format!("start: {e}")))?;
        Ok(())
    }

    /// Expected toxicity value of a comment whose label distribution is
    /// shifted by `s`, the shift clamped to keep probabilities valid.
    fn shifted_rates(&self, s: f64) -> [f64; 4] {
        let r = self.label_rates;
        let rest = 1.0 - r[0];
        if rest <= 0.0 {
            return r;
        }
        let s = s.clamp(r[0] - 1.0, r[0]);
        [r[0] - s, r[1] * (1.0 + s / rest), r[2] * (1.0 + s / rest), r[3] * (1.0 + s / rest)]
    }
}

fn draw_label(rates: &[f64; 4], u: f64) -> HateLabel {
    let mut acc = 0.0;
    for (label, r) in HateLabel::ALL.into_iter().zip(rates) {
        acc += r;
        if u < acc {
            return label;
        }
    }
    HateLabel::ALL.into_iter().zip(rates).rev().find(|(_, r)| **r > 0.0).map_or(HateLabel::Appropriate, |(l, _)| l)
}

fn discussion_length(rng: &mut impl Rng, alpha: f64, cap: u32) -> u32 {
    // P(L ≥ p) = p^-α for p ≤ cap.
    let u: f64 = 1.0 - rng.random::<f64>();
    let l = u.powf(-1.0 / alpha).floor();
    if l >= f64::from(cap) { cap } else { l.max(1.0) as u32 }
}

struct Users {
    home: Vec<Category>,
    crossing: Vec<bool>,
    pickers: [Option<WeightedAliasIndex<f64>>; 2],
}

fn users(spec: &SynthSpec, root: u64) -> Users {
    let mut rng = seed::rng(root, &[seed::tag("synth-users")]);
    let comps = WeightedAliasIndex::new(spec.users.mixture.iter().map(|c| c.weight).collect())
        .expect("validated mixture");
    let activity = Pareto::new(1.0, spec.users.activity_tail_exponent).expect("validated exponent");
    let n = spec.users.count;
    let mut weights = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut home = Vec::with_capacity(n);
    let mut crossing = Vec::with_capacity(n);
    for _ in 0..n {
        let l = spec.users.mixture[comps.sample(&mut rng)].leaning;
        let a: f64 = activity.sample(&mut rng);
        weights[0].push(a * l);
        weights[1].push(a * (1.0 - l));
        home.push(if l >= 0.5 { Category::Questionable } else { Category::Reliable });
        crossing.push(rng.random::<f64>() < spec.users.crossing_fraction);
    }
    let [wq, wr] = weights;
    Users {
        home,
        crossing,
        pickers: [WeightedAliasIndex::new(wq).ok(), WeightedAliasIndex::new(wr).ok()],
    }
}

fn picker_index(c: Category) -> usize {
    match c {
        Category::Questionable => 0,
        Category::Reliable => 1,
    }
}

/// Generates a fully labeled corpus; identical for identical `(spec, seed)`.
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<Corpus, SynthError> {
    spec.validate()?;
    let start = parse_timestamp(&spec.start).expect("validated");

    let n_channels = spec.questionable_channels + spec.reliable_channels;
    let channels: Vec<Channel> = (0..n_channels)
        .map(|c| {
            if c < spec.questionable_channels {
                Channel { channel_id: format!("chq{c:05}"), category: Category::Questionable }
            } else {
                Channel { channel_id: format!("chr{c:05}"), category: Category::Reliable }
            }
        })
        .collect();

    let mut rng = seed::rng(seed, &[seed::tag("synth-channels")]);
    let ch_dist = Pareto::new(1.0, spec.channel_tail_exponent).expect("validated");
    let ch_weights: Vec<f64> = (0..n_channels).map(|_| ch_dist.sample(&mut rng)).collect();
    let ch_pick = WeightedAliasIndex::new(ch_weights).map_err(|e| invalid(format!("channel weights: {e}")))?;

    let mut rng = seed::rng(seed, &[seed::tag("synth-videos")]);
    let mut lengths = Vec::new();
    let mut total = 0usize;
    while total < spec.comments {
        let l = discussion_length(&mut rng, spec.discussion.tail_exponent, spec.discussion.max_length) as usize;
        let l = l.min(spec.comments - total);
        lengths.push(l as u32);
        total += l;
    }
    let span = i64::from(spec.span_days.max(1)) * DAY;
    let video_channel: Vec<usize> = lengths.iter().map(|_| ch_pick.sample(&mut rng)).collect();
    let videos: Vec<Video> = video_channel
        .iter()
        .enumerate()
        .map(|(v, &c)| Video {
            video_id: format!("v{v:08}"),
            channel_id: channels[c].channel_id.clone(),
            title: String::new(),
            description: String::new(),
            published_at: start + rng.random_range(0..span),
        })
        .collect();

    let users = users(spec, seed);
    for c in Category::ALL {
        let used = video_channel.iter().any(|&ch| channels[ch].category == c);
        if used && users.pickers[picker_index(c)].is_none() {
            return Err(invalid(format!("no user has any preference for {c} videos")));
        }
    }

    let sigma = spec.delays.sigma;
    let delay_dist = LogNormal::new(spec.delays.mean_hours.ln() - sigma * sigma / 2.0, sigma).expect("validated");
    let comments: Vec<Comment> = lengths
        .par_iter()
        .enumerate()
        .flat_map_iter(|(v, &len)| {
            let mut rng = seed::rng(seed, &[seed::tag("synth-discussion"), v as u64]);
            let category = channels[video_channel[v]].category;
            let picker = users.pickers[picker_index(category)].as_ref().expect("checked above");
            let mut delays: Vec<f64> = (0..len).map(|_| delay_dist.sample(&mut rng)).collect();
            delays.sort_by(f64::total_cmp);
            let video_time = videos[v].published_at;
            delays
                .into_iter()
                .enumerate()
                .map(|(k, hours)| {
                    let user = picker.sample(&mut rng);
                    let rates = if users.crossing[user] && users.home[user] != category {
                        spec.users.crossing_rates
                    } else {
                        let s = spec.escalation.log_position * ((k + 1) as f64).ln()
                            + spec.escalation.delay_per_hour * hours;
                        spec.shifted_rates(s)
                    };
                    let label = draw_label(&rates, rng.random());
                    Comment {
                        comment_id: format!("c{v:08}-{:05}", k + 1),
                        video_id: format!("v{v:08}"),
                        user_id: format!("u{user:07}"),
                        published_at: video_time + (hours * 3600.0).round() as i64,
                        label: Some(label),
                        text: None,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    Corpus::new(channels, videos, comments).map_err(|e| invalid(format!("generated corpus rejected: {e}")))
}

/// Slope expected from fitting `n_bins` position bins of a corpus drawn
/// from `spec`, assuming the longest discussion reaches the cap. `None`
/// when delay escalation or crossing users make labels depend on more than
/// position.
pub fn expected_position_slope(spec: &SynthSpec, n_bins: usize) -> Option<f64> {
    if spec.escalation.delay_per_hour != 0.0 || spec.users.crossing_fraction > 0.0 || n_bins == 0 {
        return None;
    }
    let cap = spec.discussion.max_length;
    let alpha = spec.discussion.tail_exponent;
    let edges = log_edges(f64::from(cap), n_bins);
    let n = edges.len() - 1;
    let mut acc = vec![(0.0f64, 0.0f64); n];
    for p in 1..=cap {
        let pf = f64::from(p);
        let weight = pf.powf(-alpha);
        let rates = spec.shifted_rates(spec.escalation.log_position * pf.ln());
        let t: f64 = rates.iter().enumerate().map(|(k, r)| k as f64 * r).sum();
        let k = edges[1..n].partition_point(|&e| e <= pf);
        acc[k].0 += weight;
        acc[k].1 += weight * t;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = acc
        .iter()
        .enumerate()
        .filter(|(_, (w, _))| *w > 0.0)
        .map(|(k, (w, s))| ((k + 1) as f64, s / w))
        .unzip();
    ols_fit(&x, &y).ok().map(|r| r.slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::breakdown;
    use crate::toxicity::{fit_bins, position_binned_toxicity, shuffle_labels};

    fn small(comments: usize) -> SynthSpec {
        SynthSpec {
            comments,
            questionable_channels: 2,
            reliable_channels: 18,
            users: UserSpec { count: 2_000, ..UserSpec::default() },
            ..SynthSpec::default()
        }
    }

    #[test]
    fn defaults_parse_from_empty_json() {
        let spec: SynthSpec = serde_json::from_str("{}").unwrap();
        assert_eq!(spec, SynthSpec::default());
        let spec: SynthSpec = serde_json::from_str(r#"{"comments": 50, "escalation": {"log_position": 0.01}}"#).unwrap();
        assert_eq!(spec.comments, 50);
        assert_eq!(spec.escalation.log_position, 0.01);
        assert_eq!(spec.escalation.delay_per_hour, 0.0);
        assert!(serde_json::from_str::<SynthSpec>(r#"{"coments": 5}"#).is_err());
    }

    #[test]
    fn validation() {
        let bad = |f: fn(&mut SynthSpec)| {
            let mut s = SynthSpec::default();
            f(&mut s);
            s.validate().is_err()
        };
        assert!(SynthSpec::default().validate().is_ok());
        assert!(bad(|s| s.label_rates = [0.5, 0.5, 0.5, -0.5]));
        assert!(bad(|s| s.label_rates = [0.5, 0.2, 0.2, 0.2]));
        assert!(bad(|s| s.users.crossing_fraction = 1.5));
        assert!(bad(|s| s.escalation.log_position = 0.2));
        assert!(bad(|s| s.escalation.log_position = -0.1));
        assert!(bad(|s| s.comments = 0));
        assert!(bad(|s| s.users.mixture.clear()));
        assert!(bad(|s| s.start = "yesterday".into()));
        assert!(bad(|s| s.delays.sigma = 0.0));
    }

    #[test]
    fn deterministic_and_sized() {
        let spec = small(5_000);
        let a = synth_corpus(&spec, 4).unwrap();
        assert_eq!(a.comments().len(), 5_000);
        assert!(a.is_fully_labeled());
        assert_eq!(a, synth_corpus(&spec, 4).unwrap());
        assert_ne!(a.labels(), synth_corpus(&spec, 5).unwrap().labels());
    }

    #[test]
    fn breakdown_matches_spec() {
        let spec = SynthSpec { questionable_channels: 1, reliable_channels: 9, ..small(3_000) };
        let c = synth_corpus(&spec, 1).unwrap();
        let t = breakdown(&c);
        assert_eq!((t.questionable.channels, t.reliable.channels, t.total.channels), (1, 9, 10));
        assert_eq!(t.total.comments, 3_000);
    }

    #[test]
    fn base_rates_within_binomial_bands() {
        let spec = SynthSpec { questionable_channels: 0, reliable_channels: 1, ..small(40_000) };
        let c = synth_corpus(&spec, 8).unwrap();
        let n = c.comments().len() as f64;
        let mut counts = [0usize; 4];
        c.labels().iter().for_each(|l| counts[l.unwrap().index()] += 1);
        for (k, r) in spec.label_rates.iter().enumerate() {
            let p = counts[k] as f64 / n;
            assert!((p - r).abs() <= 3.0 * (r * (1.0 - r) / n).sqrt(), "label {k}: {p} vs {r}");
        }
    }

    #[test]
    fn positions_follow_timestamps() {
        let c = synth_corpus(&small(2_000), 3).unwrap();
        let positions = crate::toxicity::comment_positions(&c);
        for (i, comment) in c.comments().iter().enumerate() {
            let planted: u32 = comment.comment_id.rsplit('-').next().unwrap().parse().unwrap();
            assert_eq!(positions[i], planted);
        }
    }

    #[test]
    fn planted_escalation_is_recovered() {
        let spec = SynthSpec {
            escalation: EscalationSpec { log_position: 0.01, delay_per_hour: 0.0 },
            ..small(30_000)
        };
        let expected = expected_position_slope(&spec, 24).unwrap();
        assert!(expected > 0.0);
        let slopes: Vec<f64> = (0..50)
            .map(|s| {
                let c = synth_corpus(&spec, 1000 + s).unwrap();
                fit_bins(&position_binned_toxicity(&c, 24).unwrap().bins).unwrap().slope
            })
            .collect();
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        assert!((mean - expected).abs() <= 0.25 * expected, "{mean} vs {expected}");
    }

    #[test]
    fn shuffled_slopes_center_on_zero() {
        let spec = SynthSpec {
            escalation: EscalationSpec { log_position: 0.01, delay_per_hour: 0.0 },
            ..small(10_000)
        };
        let c = synth_corpus(&spec, 77).unwrap();
        let fits: Vec<_> = (0..200)
            .map(|s| fit_bins(&position_binned_toxicity(&shuffle_labels(&c, s).unwrap(), 24).unwrap().bins).unwrap())
            .collect();
        let slopes: Vec<f64> = fits.iter().map(|r| r.slope).collect();
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let sd = crate::stats::sample_sd(&slopes).unwrap();
        assert!(mean.abs() < 2.0 * sd / (slopes.len() as f64).sqrt(), "{mean} ± {sd}");
    }
}
