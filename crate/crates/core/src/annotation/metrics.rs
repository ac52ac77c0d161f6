use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::agreement::unit_counts;
use super::{AnnotationError, AnnotationRecord};
use crate::label::HateLabel;

/// Fraction of units whose two labels are equal. Every unit must carry
/// exactly two records.
pub fn percent_agreement(records: &[AnnotationRecord]) -> Result<f64, AnnotationError> {
    let units = unit_counts(records);
    if units.is_empty() {
        return Err(AnnotationError::UndefinedAlpha);
    }
    let mut agree = 0usize;
    for (unit, counts) in &units {
        let m: u32 = counts.iter().sum();
        if m != 2 {
            return Err(AnnotationError::UnitSize {
                unit: unit.to_string(),
                count: m as usize,
            });
        }
        if counts.contains(&2) {
            agree += 1;
        }
    }
    Ok(agree as f64 / units.len() as f64)
}

/// One-vs-rest scores for one label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Instances whose reference label is this class.
    pub support: usize,
    pub predicted: usize,
    /// Class absent from both predictions and references (F1 reported as 0).
    pub absent: bool,
}

impl ClassScore {
    pub(crate) fn from_counts(tp: usize, predicted: usize, support: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassScore {
            precision,
            recall,
            f1,
            support,
            predicted,
            absent: support == 0 && predicted == 0,
        }
    }
}

/// Confusion counts `[reference][predicted]`.
pub(crate) type Confusion = [[usize; 4]; 4];

pub(crate) fn scores_from_confusion(conf: &Confusion) -> BTreeMap<HateLabel, ClassScore> {
    HateLabel::ALL
        .iter()
        .map(|&l| {
            let i = l.index();
            let tp = conf[i][i];
            let support: usize = conf[i].iter().sum();
            let predicted: usize = conf.iter().map(|row| row[i]).sum();
            (l, ClassScore::from_counts(tp, predicted, support))
        })
        .collect()
}

/// Per-class F1 treating every annotation record as an evaluation instance;
/// `predictions` maps comment id to the predicted label.
pub fn per_class_f1(
    predictions: &HashMap<String, HateLabel>,
    records: &[AnnotationRecord],
) -> Result<BTreeMap<HateLabel, ClassScore>, AnnotationError> {
    let mut conf: Confusion = [[0; 4]; 4];
    for r in records {
        let pred = predictions
            .get(&r.comment_id)
            .ok_or_else(|| AnnotationError::MissingPrediction(r.comment_id.clone()))?;
        conf[r.label.index()][pred.index()] += 1;
    }
    Ok(scores_from_confusion(&conf))
}
