use serde::Serialize;

use super::comment_positions;
use crate::behavior::delays_of;
use crate::corpus::{Category, Corpus};
use crate::error::{require_labels, AnalysisError};
use crate::stats::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum XKind {
    Position,
    Delay,
}

impl XKind {
    pub const ALL: [XKind; 2] = [XKind::Position, XKind::Delay];

    pub fn as_str(self) -> &'static str {
        match self {
            XKind::Position => "position",
            XKind::Delay => "delay",
        }
    }
}

/// Mean toxicity of the comments falling in one bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToxicityBin {
    /// 1-based index among all bins, empty ones included.
    pub x: usize,
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedToxicity {
    pub x_kind: XKind,
    pub n_bins: usize,
    /// Bin edges; bin k is `[edges[k], edges[k+1])`, the last bin closed.
    pub edges: Vec<f64>,
    /// Non-empty bins only.
    pub bins: Vec<ToxicityBin>,
    /// Upper end of the delay range (hours) when a quantile cutoff applies.
    pub cutoff: Option<f64>,
    pub negative_delays: usize,
    pub above_cutoff: usize,
}

/// `n + 1` geometric edges from 1 to `max`; a single bin when `max ≤ 1`.
pub fn log_edges(max: f64, n_bins: usize) -> Vec<f64> {
    if max <= 1.0 {
        return vec![1.0, 1.0];
    }
    (0..=n_bins).map(|k| max.powf(k as f64 / n_bins as f64)).collect()
}

fn linear_edges(max: f64, n_bins: usize) -> Vec<f64> {
    if max <= 0.0 {
        return vec![0.0, 0.0];
    }
    (0..=n_bins).map(|k| max * k as f64 / n_bins as f64).collect()
}

fn bin_index(edges: &[f64], v: f64) -> usize {
    let inner = &edges[1..edges.len() - 1];
    inner.partition_point(|&e| e <= v)
}

/// Accumulates (value, toxicity) pairs into the bins given by `edges`;
/// values outside `[first, last]` edge must be filtered by the caller.
fn accumulate(edges: &[f64], items: impl Iterator<Item = (f64, u8)>) -> Vec<(u64, u64)> {
    let mut acc = vec![(0u64, 0u64); edges.len() - 1];
    for (v, t) in items {
        let cell = &mut acc[bin_index(edges, v)];
        cell.0 += 1;
        cell.1 += u64::from(t);
    }
    acc
}

fn emit(edges: &[f64], acc: &[(u64, u64)]) -> Vec<ToxicityBin> {
    acc.iter()
        .enumerate()
        .filter(|(_, (n, _))| *n > 0)
        .map(|(k, &(n, s))| ToxicityBin {
            x: k + 1,
            lo: edges[k],
            hi: edges[k + 1],
            count: n,
            y: s as f64 / n as f64,
        })
        .collect()
}

fn check_bins(n_bins: usize) -> Result<(), AnalysisError> {
    if n_bins == 0 {
        Err(AnalysisError::InvalidParameter("bin count must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Per-comment inputs to the binned regressions.
pub(crate) struct Features {
    pub position: Vec<u32>,
    /// Hours; `NaN` for negative delays.
    pub delay: Vec<f64>,
    pub toxicity: Vec<u8>,
    pub category: Vec<Category>,
}

impl Features {
    pub fn of(corpus: &Corpus) -> Result<Self, AnalysisError> {
        require_labels(corpus, "toxicity binning")?;
        Ok(Features {
            position: comment_positions(corpus),
            delay: delays_of(corpus).0,
            toxicity: corpus.comments().iter().map(|c| c.label.expect("checked").toxicity()).collect(),
            category: (0..corpus.comments().len()).map(|i| corpus.comment_category(i)).collect(),
        })
    }

    pub fn select(&self, category: Option<Category>) -> Vec<u32> {
        (0..self.toxicity.len() as u32)
            .filter(|&i| category.is_none_or(|c| self.category[i as usize] == c))
            .collect()
    }
}

pub(crate) fn bin_positions(positions: &[u32], toxicity: &[u8], selection: &[u32], n_bins: usize) -> BinnedToxicity {
    let max = selection.iter().map(|&i| positions[i as usize]).max().unwrap_or(1);
    let edges = log_edges(f64::from(max), n_bins);
    let acc = accumulate(
        &edges,
        selection.iter().map(|&i| (f64::from(positions[i as usize]), toxicity[i as usize])),
    );
    BinnedToxicity {
        x_kind: XKind::Position,
        n_bins,
        bins: emit(&edges, &acc),
        edges,
        cutoff: None,
        negative_delays: 0,
        above_cutoff: 0,
    }
}

pub(crate) fn bin_delays(
    delays: &[f64],
    toxicity: &[u8],
    selection: &[u32],
    n_bins: usize,
    cutoff_quantile: f64,
) -> BinnedToxicity {
    let valid: Vec<f64> = selection
        .iter()
        .map(|&i| delays[i as usize])
        .filter(|d| !d.is_nan())
        .collect();
    let negative = selection.len() - valid.len();
    let cutoff = quantile(&valid, cutoff_quantile).unwrap_or(0.0);
    let edges = linear_edges(cutoff, n_bins);
    let kept = selection
        .iter()
        .map(|&i| (delays[i as usize], toxicity[i as usize]))
        .filter(|(d, _)| !d.is_nan() && *d <= cutoff);
    let acc = accumulate(&edges, kept);
    let binned: u64 = acc.iter().map(|a| a.0).sum();
    BinnedToxicity {
        x_kind: XKind::Delay,
        n_bins,
        bins: emit(&edges, &acc),
        edges,
        cutoff: Some(cutoff),
        negative_delays: negative,
        above_cutoff: valid.len() - binned as usize,
    }
}

/// Mean toxicity by chronological position, over `n_bins` geometric bins
/// spanning `[1, max position]`; empty bins are dropped.
pub fn position_binned_toxicity(corpus: &Corpus, n_bins: usize) -> Result<BinnedToxicity, AnalysisError> {
    check_bins(n_bins)?;
    let f = Features::of(corpus)?;
    Ok(bin_positions(&f.position, &f.toxicity, &f.select(None), n_bins))
}

/// Mean toxicity by delay, over `n_bins` linear bins spanning `[0, q]` where
/// `q` is the `cutoff_quantile` of the delays; comments beyond `q` and with
/// negative delays are counted and left out.
pub fn delay_binned_toxicity(
    corpus: &Corpus,
    n_bins: usize,
    cutoff_quantile: f64,
) -> Result<BinnedToxicity, AnalysisError> {
    check_bins(n_bins)?;
    if !(0.0..=1.0).contains(&cutoff_quantile) {
        return Err(AnalysisError::InvalidParameter(format!(
            "cutoff quantile {cutoff_quantile} outside [0, 1]"
        )));
    }
    let f = Features::of(corpus)?;
    Ok(bin_delays(&f.delay, &f.toxicity, &f.select(None), n_bins, cutoff_quantile))
}
