//! Krippendorff's alpha from the coincidence matrix.
//!
//! Labels map to the values A→0, I→1, O→2, V→3. With `m_u` values in unit
//! `u`, the coincidence matrix is
//! `o_ck = Σ_u (n_uc·n_uk − [c=k]·n_uc) / (m_u − 1)` over units with
//! `m_u ≥ 2`, and `α = 1 − (n − 1)·Σ o_ck δ²_ck / Σ n_c n_k δ²_ck`.

use std::collections::HashMap;

use serde::Serialize;

use super::{AnnotationError, AnnotationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    /// δ²(v, w) = (v − w)²
    #[default]
    Interval,
    /// δ²(v, w) = [v ≠ w]
    Nominal,
}

impl DistanceMetric {
    fn delta2(self, v: usize, w: usize) -> f64 {
        match self {
            DistanceMetric::Interval => ((v as f64) - (w as f64)).powi(2),
            DistanceMetric::Nominal => f64::from(u8::from(v != w)),
        }
    }
}

/// Alpha over per-unit value counts (`counts[u][v]` = annotations of value `v`).
///
/// Units with fewer than two annotations are skipped. Returns 1.0 when the
/// expected disagreement is zero.
pub fn alpha_from_units<const V: usize>(
    counts: &[[u32; V]],
    metric: DistanceMetric,
) -> Result<f64, AnnotationError> {
    let mut o = [[0.0f64; V]; V];
    let mut pairable = false;
    for unit in counts {
        let m: u32 = unit.iter().sum();
        if m < 2 {
            continue;
        }
        pairable = true;
        let denom = (m - 1) as f64;
        for c in 0..V {
            if unit[c] == 0 {
                continue;
            }
            for k in 0..V {
                let same = if c == k { unit[c] } else { 0 };
                let pairs = (unit[c] as u64 * unit[k] as u64 - same as u64) as f64;
                o[c][k] += pairs / denom;
            }
        }
    }
    if !pairable {
        return Err(AnnotationError::UndefinedAlpha);
    }
    let n_c: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..V {
        for k in 0..V {
            let d = metric.delta2(c, k);
            observed += o[c][k] * d;
            expected += n_c[c] * n_c[k] * d;
        }
    }
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

pub(crate) fn unit_counts(records: &[AnnotationRecord]) -> Vec<(&str, [u32; 4])> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut units: Vec<(&str, [u32; 4])> = Vec::new();
    for r in records {
        let slot = *index.entry(r.comment_id.as_str()).or_insert_with(|| {
            units.push((r.comment_id.as_str(), [0; 4]));
            units.len() - 1
        });
        units[slot].1[r.label.index()] += 1;
    }
    units
}

/// Alpha over annotation records, one unit per comment.
pub fn krippendorff_alpha(records: &[AnnotationRecord], metric: DistanceMetric) -> Result<f64, AnnotationError> {
    let counts: Vec<[u32; 4]> = unit_counts(records).into_iter().map(|(_, c)| c).collect();
    alpha_from_units(&counts, metric)
}

/// Agreement summary for an annotated set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub alpha: f64,
    /// Fraction of doubly-annotated units whose two labels agree.
    pub acc: f64,
    /// Number of annotation records.
    pub size: usize,
    pub units: usize,
    /// Units without exactly two records; they count toward alpha (when they
    /// have two or more) but not toward `acc`.
    pub units_not_paired: usize,
}

pub fn agreement_report(records: &[AnnotationRecord]) -> Result<AgreementReport, AnnotationError> {
    let units = unit_counts(records);
    let counts: Vec<[u32; 4]> = units.iter().map(|(_, c)| *c).collect();
    let alpha = alpha_from_units(&counts, DistanceMetric::Interval)?;
    let mut paired = 0usize;
    let mut agree = 0usize;
    for c in &counts {
        if c.iter().sum::<u32>() == 2 {
            paired += 1;
            if c.contains(&2) {
                agree += 1;
            }
        }
    }
    Ok(AgreementReport {
        alpha,
        acc: if paired == 0 { 0.0 } else { agree as f64 / paired as f64 },
        size: records.len(),
        units: units.len(),
        units_not_paired: units.len() - paired,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::HateLabel;
    use crate::label::HateLabel::*;
    use proptest::prelude::*;

    /// Independent route: enumerate every ordered pair of distinct annotations
    /// within a unit (weight 1/(m_u−1)) for D_o, and every ordered pair of
    /// distinct pairable values across the whole pool for D_e.
    fn brute_force_alpha(units: &[Vec<usize>], metric: DistanceMetric) -> Option<f64> {
        let pairable: Vec<&Vec<usize>> = units.iter().filter(|u| u.len() >= 2).collect();
        if pairable.is_empty() {
            return None;
        }
        let pool: Vec<usize> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
        let n = pool.len() as f64;
        let mut d_o = 0.0;
        for u in &pairable {
            let w = 1.0 / (u.len() as f64 - 1.0);
            for i in 0..u.len() {
                for j in 0..u.len() {
                    if i != j {
                        d_o += w * metric.delta2(u[i], u[j]);
                    }
                }
            }
        }
        d_o /= n;
        let mut d_e = 0.0;
        for i in 0..pool.len() {
            for j in 0..pool.len() {
                if i != j {
                    d_e += metric.delta2(pool[i], pool[j]);
                }
            }
        }
        d_e /= n * (n - 1.0);
        Some(if d_e == 0.0 { 1.0 } else { 1.0 - d_o / d_e })
    }

    fn records(units: &[&[HateLabel]]) -> Vec<AnnotationRecord> {
        units
            .iter()
            .enumerate()
            .flat_map(|(u, labels)| {
                labels
                    .iter()
                    .enumerate()
                    .map(move |(a, &l)| AnnotationRecord::new(format!("c{u}"), format!("a{a}"), l))
            })
            .collect()
    }

    #[test]
    fn perfect_agreement_is_one() {
        let r = records(&[&[Appropriate, Appropriate], &[Violent, Violent], &[Offensive, Offensive]]);
        assert_eq!(krippendorff_alpha(&r, DistanceMetric::Interval).unwrap(), 1.0);
    }

    #[test]
    fn two_units_of_zero_one_give_minus_half() {
        let r = records(&[&[Appropriate, Inappropriate], &[Appropriate, Inappropriate]]);
        let a = krippendorff_alpha(&r, DistanceMetric::Interval).unwrap();
        assert!((a + 0.5).abs() < 1e-12, "{a}");
        let oracle = brute_force_alpha(&[vec![0, 1], vec![0, 1]], DistanceMetric::Interval).unwrap();
        assert!((oracle + 0.5).abs() < 1e-12);
    }

    #[test]
    fn singly_annotated_units_are_undefined() {
        let r = records(&[&[Appropriate], &[Violent]]);
        assert!(matches!(
            krippendorff_alpha(&r, DistanceMetric::Interval),
            Err(AnnotationError::UndefinedAlpha)
        ));
    }

    #[test]
    fn identical_values_everywhere_is_one_by_convention() {
        let r = records(&[&[Offensive, Offensive, Offensive]]);
        assert_eq!(krippendorff_alpha(&r, DistanceMetric::Interval).unwrap(), 1.0);
    }

    #[test]
    fn report_counts_pairs() {
        let r = records(&[
            &[Appropriate, Appropriate],
            &[Appropriate, Inappropriate],
            &[Violent, Violent],
            &[Offensive, Offensive],
            &[Offensive, Offensive, Violent],
        ]);
        let rep = agreement_report(&r).unwrap();
        assert_eq!(rep.size, 11);
        assert_eq!(rep.units_not_paired, 1);
        assert!((rep.acc - 0.75).abs() < 1e-15);
    }

    fn to_counts(units: &[Vec<usize>]) -> Vec<[u32; 4]> {
        units
            .iter()
            .map(|u| {
                let mut c = [0u32; 4];
                for &v in u {
                    c[v] += 1;
                }
                c
            })
            .collect()
    }

    fn units_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
        prop::collection::vec(prop::collection::vec(0usize..4, 1..=4), 1..=10)
    }

    proptest! {
        #[test]
        fn matches_brute_force(units in units_strategy()) {
            for metric in [DistanceMetric::Interval, DistanceMetric::Nominal] {
                let fast = alpha_from_units(&to_counts(&units), metric).ok();
                let slow = brute_force_alpha(&units, metric);
                match (fast, slow) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b),
                    (None, None) => {}
                    other => prop_assert!(false, "{:?}", other),
                }
            }
        }

        #[test]
        fn invariant_to_unit_and_annotator_order(units in units_strategy(), rot in 0usize..10) {
            let base = alpha_from_units(&to_counts(&units), DistanceMetric::Interval).ok();
            let mut permuted: Vec<Vec<usize>> = units.iter().map(|u| u.iter().rev().copied().collect()).collect();
            let r = rot % permuted.len();
            permuted.rotate_left(r);
            let other = alpha_from_units(&to_counts(&permuted), DistanceMetric::Interval).ok();
            match (base, other) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a.is_none(), b.is_none()),
            }
        }

        // Cloning every unit (a second copy of the data set) scales the
        // disagreement ratio by the finite-sample factor (2n−1)/(2(n−1)):
        // 1 − α' = (2n−1)/(2(n−1)) · (1 − α).
        #[test]
        fn duplicated_data_obeys_finite_sample_relation(units in units_strategy()) {
            let counts = to_counts(&units);
            let n: u32 = counts.iter().map(|c| c.iter().sum::<u32>()).filter(|&m| m >= 2).sum();
            prop_assume!(n >= 2);
            let mut doubled = counts.clone();
            doubled.extend_from_slice(&counts);
            let a = alpha_from_units(&counts, DistanceMetric::Interval).unwrap();
            let b = alpha_from_units(&doubled, DistanceMetric::Interval).unwrap();
            let n = n as f64;
            if a == 1.0 {
                prop_assert_eq!(b, 1.0);
            } else {
                let factor = (2.0 * n - 1.0) / (2.0 * (n - 1.0));
                prop_assert!(((1.0 - b) - factor * (1.0 - a)).abs() < 1e-9);
            }
        }
    }
}
