use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::ToxicityBin;
use crate::error::AnalysisError;

/// Simple linear regression `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionResult {
    pub intercept: f64,
    pub intercept_se: f64,
    pub intercept_t: f64,
    pub intercept_p: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub slope_t: f64,
    pub slope_p: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub residual_se: f64,
    pub num_obs: usize,
}

fn two_sided_p(t: f64, dist: &StudentsT) -> f64 {
    if t.is_nan() {
        1.0
    } else {
        (2.0 * dist.sf(t.abs())).min(1.0)
    }
}

fn t_stat(estimate: f64, se: f64) -> f64 {
    if se > 0.0 {
        estimate / se
    } else if estimate == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(estimate)
    }
}

/// Ordinary least squares with t-distribution p-values on `n − 2` degrees
/// of freedom.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<RegressionResult, AnalysisError> {
    assert_eq!(x.len(), y.len(), "x and y must pair up");
    let n = x.len();
    if n < 3 {
        return Err(AnalysisError::TooFewBins(n));
    }
    let nf = n as f64;
    let xm = x.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - xm, yi - ym);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= f64::EPSILON * f64::EPSILON * nf * xm.abs().max(1.0).powi(2) {
        return Err(AnalysisError::ZeroVarianceX);
    }
    let y_constant = syy <= f64::EPSILON * f64::EPSILON * nf * ym.abs().max(1.0).powi(2);
    let slope = if y_constant { 0.0 } else { sxy / sxx };
    let intercept = ym - slope * xm;
    let sse = if y_constant {
        0.0
    } else {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - intercept - slope * xi;
                r * r
            })
            .sum()
    };
    let df = nf - 2.0;
    let s2 = sse / df;
    let slope_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / nf + xm * xm / sxx)).sqrt();
    let r2 = if y_constant { 0.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let adj_r2 = 1.0 - (1.0 - r2) * (nf - 1.0) / df;
    let dist = StudentsT::new(0.0, 1.0, df).expect("df ≥ 1");
    let slope_t = t_stat(slope, slope_se);
    let intercept_t = t_stat(intercept, intercept_se);
    Ok(RegressionResult {
        intercept,
        intercept_se,
        intercept_t,
        intercept_p: two_sided_p(intercept_t, &dist),
        slope,
        slope_se,
        slope_t,
        slope_p: two_sided_p(slope_t, &dist),
        r2,
        adj_r2,
        residual_se: s2.sqrt(),
        num_obs: n,
    })
}

/// Regression of bin means on their 1-based bin index.
pub fn fit_bins(bins: &[ToxicityBin]) -> Result<RegressionResult, AnalysisError> {
    let x: Vec<f64> = bins.iter().map(|b| b.x as f64).collect();
    let y: Vec<f64> = bins.iter().map(|b| b.y).collect();
    ols_fit(&x, &y)
}

/// Significance stars: `***` p < 0.001, `**` p < 0.01, `*` p < 0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
