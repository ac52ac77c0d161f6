//! Hartigan's dip statistic for unimodality.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::seed;

/// Dip of the empirical distribution of `xs`: the sup-distance to the
/// closest unimodal distribution. Ranges over `[1/(2n), 1/4]`.
pub fn dip_statistic(xs: &[f64]) -> f64 {
    let mut x: Vec<f64> = xs.iter().copied().filter(|v| v.is_finite()).collect();
    x.sort_by(f64::total_cmp);
    dip_sorted(&x)
}

/// Greatest convex minorant and least concave majorant walk over sorted
/// data (1-based indices internally, scaled by n until the end).
fn dip_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    let mut x = Vec::with_capacity(n + 1);
    x.push(f64::NAN);
    x.extend_from_slice(xs);
    let mut dip = 1.0;
    if n < 2 || x[n] == x[1] {
        return dip / (2.0 * n as f64);
    }

    let mut mn = vec![0usize; n + 1];
    let mut mj = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (x[j] - x[mnj]) * ((mnj - mnmnj) as f64) < (x[mnj] - x[mnmnj]) * ((j - mnj) as f64)
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (x[k] - x[mjk]) * (mjk as f64 - mjmjk as f64) < (x[mjk] - x[mjmjk]) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];
    let (mut low, mut high) = (1usize, n);
    loop {
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        lcm[1] = low;
        let mut i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        let mut d = 0.0;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (x[lcmiv] - x[gcmi1]) * (gcmix - gcmi1) as f64 / (x[gcmix] - x[gcmi1]);
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (x[gcmix] - x[lcmiv1]) * (lcmiv - lcmiv1) as f64 / (x[lcmiv] - x[lcmiv1])
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                ix = ix.max(1);
                iv = iv.min(l_lcm);
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }
        if d < dip {
            break;
        }

        let mut dip_l: f64 = 0.0;
        for j in ig..l_gcm {
            let mut max_t: f64 = 1.0;
            let (jb, je) = (gcm[j + 1], gcm[j]);
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    max_t = max_t.max((jj - jb + 1) as f64 - (x[jj] - x[jb]) * c);
                }
            }
            dip_l = dip_l.max(max_t);
        }
        let mut dip_u: f64 = 0.0;
        for j in ih..l_lcm {
            let mut max_t: f64 = 1.0;
            let (jb, je) = (lcm[j], lcm[j + 1]);
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    max_t = max_t.max((x[jj] - x[jb]) * c - (jj as f64 - jb as f64 - 1.0));
                }
            }
            dip_u = dip_u.max(max_t);
        }
        dip = dip.max(dip_l).max(dip_u);

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip / (2.0 * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipTest {
    pub n: usize,
    pub dip: f64,
    /// Share of uniform samples of the same size with a dip at least as large.
    pub p_value: f64,
    pub simulations: usize,
}

/// Dip statistic with a Monte Carlo p-value against the uniform null.
pub fn dip_test(xs: &[f64], simulations: usize, seed: u64) -> DipTest {
    let n = xs.iter().filter(|v| v.is_finite()).count();
    let dip = dip_statistic(xs);
    let exceed = (0..simulations as u64)
        .into_par_iter()
        .filter(|&s| {
            let mut rng = seed::rng(seed, &[seed::tag("dip-null"), n as u64, s]);
            let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            u.sort_by(f64::total_cmp);
            dip_sorted(&u) >= dip
        })
        .count();
    DipTest {
        n,
        dip,
        p_value: (exceed + 1) as f64 / (simulations + 1) as f64,
        simulations,
    }
}
