//! Annotator-fold cross validation.
//!
//! Fold `i` tests on every record of annotator `i`. Its training pool holds
//! only records whose comment does not appear in the test set, whoever
//! annotated them, so no comment leaks across the split.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::agreement::alpha_from_units;
use super::metrics::{scores_from_confusion, ClassScore, Confusion};
use super::{AnnotationRecord, DistanceMetric, LabelInput, Labeler, LabelerIdentity, TextIndex, Trainer};
use crate::label::HateLabel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub annotator: String,
    /// Indices into the record slice.
    pub test: Vec<usize>,
    pub train: Vec<usize>,
}

/// Folds for `roster` (annotator ids). Annotators with no records are
/// returned in the second element and get no fold.
pub fn cv_folds(records: &[AnnotationRecord], roster: &[String]) -> (Vec<Fold>, Vec<String>) {
    let mut folds = Vec::new();
    let mut skipped = Vec::new();
    for annotator in roster {
        let test: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].annotator_id == *annotator)
            .collect();
        if test.is_empty() {
            log::warn!("annotator '{annotator}' has no records; fold skipped");
            skipped.push(annotator.clone());
            continue;
        }
        let held_out: HashSet<&str> = test.iter().map(|&i| records[i].comment_id.as_str()).collect();
        let train = (0..records.len())
            .filter(|&i| !held_out.contains(records[i].comment_id.as_str()))
            .collect();
        folds.push(Fold {
            annotator: annotator.clone(),
            test,
            train,
        });
    }
    (folds, skipped)
}

/// Labeler-vs-annotation metrics over one set of instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledMetrics {
    pub instances: usize,
    /// Interval alpha over (reference, prediction) pairs; `None` without instances.
    pub alpha: Option<f64>,
    pub acc: f64,
    /// Keyed by label name (appropriate, inappropriate, offensive, violent).
    pub f1: BTreeMap<String, ClassScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub annotator: String,
    pub n_train: usize,
    pub metrics: PooledMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroMetrics {
    pub alpha: Option<f64>,
    pub acc: f64,
    pub f1: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub labeler: LabelerIdentity,
    pub folds: Vec<FoldReport>,
    pub skipped: Vec<String>,
    /// Over the union of all fold test sets.
    pub micro: PooledMetrics,
    /// Unweighted mean of per-fold values.
    #[serde(rename = "macro")]
    pub macro_avg: MacroMetrics,
}

struct Tally {
    conf: Confusion,
}

impl Tally {
    fn new() -> Self {
        Tally { conf: [[0; 4]; 4] }
    }

    fn add(&mut self, reference: HateLabel, predicted: HateLabel) {
        self.conf[reference.index()][predicted.index()] += 1;
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.conf.iter_mut().zip(&other.conf) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn metrics(&self) -> PooledMetrics {
        let total: usize = self.conf.iter().flatten().sum();
        let correct: usize = (0..4).map(|i| self.conf[i][i]).sum();
        // Each instance is a two-value unit {reference, prediction}.
        let mut units = Vec::with_capacity(16);
        let mut weights = Vec::with_capacity(16);
        for r in 0..4 {
            for p in 0..4 {
                if self.conf[r][p] > 0 {
                    let mut u = [0u32; 4];
                    u[r] += 1;
                    u[p] += 1;
                    units.push(u);
                    weights.push(self.conf[r][p]);
                }
            }
        }
        let expanded: Vec<[u32; 4]> = units
            .iter()
            .zip(&weights)
            .flat_map(|(u, &w)| std::iter::repeat_n(*u, w))
            .collect();
        PooledMetrics {
            instances: total,
            alpha: alpha_from_units(&expanded, DistanceMetric::Interval).ok(),
            acc: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            f1: scores_from_confusion(&self.conf)
                .into_iter()
                .map(|(l, s)| (l.name().to_string(), s))
                .collect(),
        }
    }
}

/// Distinct annotator ids in sorted order.
pub fn annotators_in(records: &[AnnotationRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| r.annotator_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Runs one fold per annotator in `roster` (all annotators in the records
/// when `None`).
pub fn annotator_fold_cv<T: Trainer>(
    trainer: &T,
    records: &[AnnotationRecord],
    texts: &TextIndex,
    roster: Option<&[String]>,
) -> CvReport {
    let roster = roster.map(<[String]>::to_vec).unwrap_or_else(|| annotators_in(records));
    let (folds, skipped) = cv_folds(records, &roster);

    let run = |fold: &Fold| -> Tally {
        let train: Vec<&AnnotationRecord> = fold.train.iter().map(|&i| &records[i]).collect();
        let model = trainer.train(&train, texts);
        let mut tally = Tally::new();
        for &i in &fold.test {
            let r = &records[i];
            let input = LabelInput {
                comment_id: &r.comment_id,
                text: texts.get(&r.comment_id).map(String::as_str),
            };
            tally.add(r.label, model.label(&input));
        }
        tally
    };
    let tallies: Vec<Tally> = if trainer.concurrent() {
        folds.par_iter().map(run).collect()
    } else {
        folds.iter().map(run).collect()
    };

    let mut pooled = Tally::new();
    let mut reports = Vec::with_capacity(folds.len());
    for (fold, tally) in folds.iter().zip(&tallies) {
        pooled.merge(tally);
        reports.push(FoldReport {
            annotator: fold.annotator.clone(),
            n_train: fold.train.len(),
            metrics: tally.metrics(),
        });
    }
    let macro_avg = macro_average(&reports);
    CvReport {
        labeler: trainer.identity(),
        folds: reports,
        skipped,
        micro: pooled.metrics(),
        macro_avg,
    }
}

fn macro_average(folds: &[FoldReport]) -> MacroMetrics {
    let k = folds.len().max(1) as f64;
    let alphas: Vec<f64> = folds.iter().filter_map(|f| f.metrics.alpha).collect();
    let f1 = HateLabel::ALL
        .iter()
        .map(|l| {
            let present: Vec<f64> = folds
                .iter()
                .map(|f| &f.metrics.f1[l.name()])
                .filter(|s| !s.absent)
                .map(|s| s.f1)
                .collect();
            let avg = if present.is_empty() {
                0.0
            } else {
                present.iter().sum::<f64>() / present.len() as f64
            };
            (l.name().to_string(), avg)
        })
        .collect();
    MacroMetrics {
        alpha: if alphas.is_empty() {
            None
        } else {
            Some(alphas.iter().sum::<f64>() / alphas.len() as f64)
        },
        acc: folds.iter().map(|f| f.metrics.acc).sum::<f64>() / k,
        f1,
    }
}
