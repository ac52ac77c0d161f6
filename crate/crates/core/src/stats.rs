//! Descriptive statistics shared by the analytics modules.

use serde::Serialize;

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Sample standard deviation (n − 1 denominator); needs two observations.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let m = mean(xs)?;
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (n - 1) as f64).sqrt())
}

/// Bias-adjusted Fisher–Pearson skewness `G1 = g1 · sqrt(n(n−1)) / (n−2)`.
///
/// Undefined for fewer than three observations or zero spread.
pub fn skewness(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let m = mean(xs)?;
    let (m2, m3) = xs.iter().fold((0.0, 0.0), |(s2, s3), x| {
        let d = x - m;
        (s2 + d * d, s3 + d * d * d)
    });
    let m2 = m2 / nf;
    let m3 = m3 / nf;
    if m2 <= 1e-24 * m.abs().max(1.0).powi(2) {
        return None;
    }
    let g1 = m3 / m2.powf(1.5);
    Some(g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0))
}

/// Mean after removing the `floor(trim · n)` largest observations.
pub fn upper_trimmed_mean(xs: &[f64], trim: f64) -> Option<f64> {
    if xs.is_empty() || !(0.0..1.0).contains(&trim) {
        return None;
    }
    let drop = (trim * xs.len() as f64).floor() as usize;
    let keep = xs.len() - drop;
    let mut v = xs.to_vec();
    if drop > 0 {
        v.select_nth_unstable_by(keep - 1, f64::total_cmp);
    }
    mean(&v[..keep])
}

/// Linear-interpolation quantile (R type 7) of unsorted data.
pub fn quantile(xs: &[f64], q: f64) -> Option<f64> {
    if xs.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut v = xs.to_vec();
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let (_, &mut lo_v, rest) = v.select_nth_unstable_by(lo, f64::total_cmp);
    if lo + 1 >= xs.len() || h == lo as f64 {
        return Some(lo_v);
    }
    let hi_v = rest.iter().copied().fold(f64::INFINITY, f64::min);
    Some(lo_v + (h - lo as f64) * (hi_v - lo_v))
}

/// Mean, spread and shape of a sample. Undefined moments are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub skewness: Option<f64>,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        Summary {
            n: xs.len(),
            mean: mean(xs),
            sd: sample_sd(xs),
            skewness: skewness(xs),
        }
    }
}
