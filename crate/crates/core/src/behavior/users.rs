use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Category, Corpus};
use crate::error::{require_labels, AnalysisError};
use crate::label::HateLabel;
use crate::stats::Summary;

/// Label fractions, leaning and square-projection coordinates of one user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserProfile {
    pub user_id: String,
    /// Total comments.
    pub c: u64,
    pub a: f64,
    pub i: f64,
    pub o: f64,
    pub v: f64,
    /// Comments on questionable-channel videos.
    pub q: u64,
    /// Leaning `q / c`.
    pub l: f64,
    /// Non-appropriate fraction `1 − a`.
    pub abar: f64,
    /// `o + v`
    pub x: f64,
    /// `i + o`
    pub y: f64,
    /// Label counts (A, I, O, V) on questionable and reliable videos.
    #[serde(skip)]
    pub by_category: [[u64; 4]; 2],
}

impl UserProfile {
    fn from_counts(user_id: String, by_category: [[u64; 4]; 2]) -> Self {
        let counts: [u64; 4] = std::array::from_fn(|k| by_category[0][k] + by_category[1][k]);
        let c: u64 = counts.iter().sum();
        let q: u64 = by_category[cat_index(Category::Questionable)].iter().sum();
        let f = counts.map(|n| n as f64 / c as f64);
        UserProfile {
            user_id,
            c,
            a: f[0],
            i: f[1],
            o: f[2],
            v: f[3],
            q,
            l: q as f64 / c as f64,
            abar: (counts[1] + counts[2] + counts[3]) as f64 / c as f64,
            x: (counts[2] + counts[3]) as f64 / c as f64,
            y: (counts[1] + counts[2]) as f64 / c as f64,
            by_category,
        }
    }

    pub fn counts(&self) -> [u64; 4] {
        std::array::from_fn(|k| self.by_category[0][k] + self.by_category[1][k])
    }

    /// Non-appropriate fraction over comments on one category's videos.
    pub fn abar_on(&self, category: Category) -> Option<f64> {
        let counts = self.by_category[cat_index(category)];
        let total: u64 = counts.iter().sum();
        (total > 0).then(|| (total - counts[HateLabel::Appropriate.index()]) as f64 / total as f64)
    }
}

fn cat_index(c: Category) -> usize {
    match c {
        Category::Questionable => 0,
        Category::Reliable => 1,
    }
}

/// One profile per commenting user, sorted by user id.
pub fn user_profiles(corpus: &Corpus) -> Result<Vec<UserProfile>, AnalysisError> {
    require_labels(corpus, "user profiles")?;
    type Acc<'a> = HashMap<&'a str, [[u64; 4]; 2]>;
    let merged: Acc = (0..corpus.comments().len())
        .into_par_iter()
        .fold(Acc::new, |mut acc, i| {
            let c = &corpus.comments()[i];
            let label = c.label.expect("checked labeled");
            let cell = acc.entry(c.user_id.as_str()).or_default();
            cell[cat_index(corpus.comment_category(i))][label.index()] += 1;
            acc
        })
        .reduce(Acc::new, |mut a, b| {
            for (user, counts) in b {
                let cell = a.entry(user).or_default();
                for (row, add) in cell.iter_mut().zip(counts) {
                    for (x, y) in row.iter_mut().zip(add) {
                        *x += y;
                    }
                }
            }
            a
        });
    let mut profiles: Vec<UserProfile> = merged
        .into_iter()
        .map(|(user, counts)| UserProfile::from_counts(user.to_string(), counts))
        .collect();
    profiles.sort_unstable_by(|a, b| a.user_id.cmp(&b.user_id));
    Ok(profiles)
}

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Barycentric placement of the (A, O, V) mix in the triangle
/// A = (0, 0), O = (1, 0), V = (1/2, √3/2); `None` for users with only
/// inappropriate comments.
pub fn triangle_projection(profile: &UserProfile) -> Option<(f64, f64)> {
    let [a, _, o, v] = profile.counts().map(|n| n as f64);
    let s = a + o + v;
    if s == 0.0 {
        return None;
    }
    Some(((o + 0.5 * v) / s, SQRT3_2 * v / s))
}

/// 2D histogram of leaning (x) against non-appropriate fraction (y) over
/// `[0, 1]²`; the upper edge falls in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub bins_x: usize,
    pub bins_y: usize,
    /// `counts[iy][ix]`
    pub counts: Vec<Vec<u64>>,
}

impl DensityGrid {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Lower-left corner of cell `(ix, iy)`.
    pub fn cell_origin(&self, ix: usize, iy: usize) -> (f64, f64) {
        (ix as f64 / self.bins_x as f64, iy as f64 / self.bins_y as f64)
    }
}

fn bin_of(v: f64, bins: usize) -> usize {
    ((v * bins as f64).floor() as usize).min(bins - 1)
}

pub fn joint_density(profiles: &[UserProfile], bins_x: usize, bins_y: usize) -> Result<DensityGrid, AnalysisError> {
    if bins_x < 2 || bins_y < 2 {
        return Err(AnalysisError::InvalidParameter(format!(
            "density grid needs at least 2 bins per axis, got {bins_x}×{bins_y}"
        )));
    }
    let mut counts = vec![vec![0u64; bins_x]; bins_y];
    for p in profiles {
        counts[bin_of(p.abar, bins_y)][bin_of(p.l, bins_x)] += 1;
    }
    Ok(DensityGrid { bins_x, bins_y, counts })
}

/// Interval of leaning values with configurable open/closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaningInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl LeaningInterval {
    /// `(0, 0.25]`: users mostly on reliable channels.
    pub const RELIABLE_SKEWED: LeaningInterval = LeaningInterval {
        lo: 0.0,
        hi: 0.25,
        lo_closed: false,
        hi_closed: true,
    };
    /// `[0.75, 1)`: users mostly on questionable channels.
    pub const QUESTIONABLE_SKEWED: LeaningInterval = LeaningInterval {
        lo: 0.75,
        hi: 1.0,
        lo_closed: true,
        hi_closed: false,
    };

    pub fn contains(&self, l: f64) -> bool {
        let above = if self.lo_closed { l >= self.lo } else { l > self.lo };
        let below = if self.hi_closed { l <= self.hi } else { l < self.hi };
        above && below
    }
}

impl fmt::Display for LeaningInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl FromStr for LeaningInterval {
    type Err = String;

    /// Parses interval notation such as `(0,0.25]` or `[0.75, 1)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("invalid interval '{s}' (expected e.g. (0,0.25] or [0.75,1))");
        let lo_closed = match s.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let hi_closed = match s.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let inner = s.get(1..s.len() - 1).ok_or_else(bad)?;
        let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(bad());
        }
        Ok(LeaningInterval { lo, hi, lo_closed, hi_closed })
    }
}

/// Non-appropriate fractions of the users whose leaning falls in an interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDistribution {
    pub interval: String,
    pub target: Option<Category>,
    pub user_ids: Vec<String>,
    pub values: Vec<f64>,
    pub summary: Summary,
    /// Group members without comments on the target category.
    pub excluded_no_target: usize,
}

pub fn group_distribution(
    profiles: &[UserProfile],
    interval: LeaningInterval,
    target: Option<Category>,
) -> GroupDistribution {
    let mut user_ids = Vec::new();
    let mut values = Vec::new();
    let mut excluded = 0;
    for p in profiles.iter().filter(|p| interval.contains(p.l)) {
        let value = match target {
            None => Some(p.abar),
            Some(c) => p.abar_on(c),
        };
        match value {
            Some(v) => {
                user_ids.push(p.user_id.clone());
                values.push(v);
            }
            None => excluded += 1,
        }
    }
    GroupDistribution {
        interval: interval.to_string(),
        target,
        summary: Summary::of(&values),
        user_ids,
        values,
        excluded_no_target: excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::dip::dip_test;
    use crate::corpus::fixtures::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use HateLabel::*;

    /// Users given as (user, [(category, label, repeat)]).
    fn corpus(users: &[(&str, Vec<(Category, HateLabel, usize)>)]) -> Corpus {
        let channels = vec![channel("q", Category::Questionable), channel("r", Category::Reliable)];
        let videos = vec![video("vq", "q", 0), video("vr", "r", 0)];
        let mut comments = Vec::new();
        for (user, items) in users {
            for &(cat, label, n) in items {
                let v = if cat == Category::Questionable { "vq" } else { "vr" };
                for _ in 0..n {
                    let id = format!("c{:07}", comments.len());
                    comments.push(comment(&id, v, user, 10, Some(label)));
                }
            }
        }
        Corpus::new(channels, videos, comments).unwrap()
    }

    fn profile(counts: [u64; 4]) -> UserProfile {
        UserProfile::from_counts("u".into(), [[0; 4], counts])
    }

    #[test]
    fn vertices_and_leaning() {
        let c = corpus(&[
            ("pure-a", vec![(Category::Reliable, Appropriate, 4)]),
            ("pure-v", vec![(Category::Questionable, Violent, 2)]),
            ("mixed", vec![(Category::Questionable, Offensive, 3), (Category::Reliable, Inappropriate, 1)]),
        ]);
        let profiles = user_profiles(&c).unwrap();
        let get = |id: &str| profiles.iter().find(|p| p.user_id == id).unwrap();
        assert_eq!((get("pure-a").x, get("pure-a").y), (0.0, 0.0));
        assert_eq!((get("pure-v").x, get("pure-v").y), (1.0, 0.0));
        let m = get("mixed");
        assert_eq!((m.c, m.q, m.l), (4, 3, 0.75));
        assert_eq!((m.x, m.y, m.abar), (0.75, 1.0, 1.0));

        assert_eq!((profile([0, 3, 0, 0]).x, profile([0, 3, 0, 0]).y), (0.0, 1.0));
        assert_eq!((profile([0, 0, 3, 0]).x, profile([0, 0, 3, 0]).y), (1.0, 1.0));
    }

    #[test]
    fn triangle_vertices_centroid_and_exclusion() {
        assert_eq!(triangle_projection(&profile([5, 0, 0, 0])), Some((0.0, 0.0)));
        assert_eq!(triangle_projection(&profile([0, 2, 5, 0])), Some((1.0, 0.0)));
        let (vx, vy) = triangle_projection(&profile([0, 0, 0, 1])).unwrap();
        assert!((vx - 0.5).abs() < 1e-15 && (vy - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let (cx, cy) = triangle_projection(&profile([2, 7, 2, 2])).unwrap();
        assert!((cx - 0.5).abs() < 1e-12);
        assert!((cy - 3f64.sqrt() / 6.0).abs() < 1e-12);
        assert_eq!(triangle_projection(&profile([0, 4, 0, 0])), None);
    }

    #[test]
    fn density_corner_and_bin_validation() {
        let ps = vec![profile([3, 0, 0, 0]); 5];
        let grid = joint_density(&ps, 50, 50).unwrap();
        assert_eq!(grid.counts[0][0], 5);
        assert_eq!(grid.total(), 5);
        assert!(joint_density(&ps, 1, 50).is_err());

        let top = vec![UserProfile::from_counts("u".into(), [[0, 0, 0, 2], [0; 4]])];
        let grid = joint_density(&top, 4, 4).unwrap();
        assert_eq!(grid.counts[3][3], 1);
    }

    #[test]
    fn uniform_profiles_pass_chi_square() {
        // Fine-grained fractions from many comments approximate uniform (l, abar).
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let ps: Vec<UserProfile> = (0..10_000)
            .map(|k| {
                let q = rng.random_range(0..=1000u64);
                let bad = rng.random_range(0..=1000u64);
                let mut cells = [[0u64; 4]; 2];
                // Split q questionable and 1000 − q reliable comments; `bad` are violent.
                let bad_q = bad * q / 1000;
                cells[0] = [q - bad_q, 0, 0, bad_q];
                cells[1] = [(1000 - q) - (bad - bad_q), 0, 0, bad - bad_q];
                UserProfile::from_counts(format!("u{k}"), cells)
            })
            .collect();
        let bins = 5;
        let grid = joint_density(&ps, bins, bins).unwrap();
        let expected = ps.len() as f64 / (bins * bins) as f64;
        let chi2: f64 = grid.counts.iter().flatten().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        let p = 1.0 - ChiSquared::new((bins * bins - 1) as f64).unwrap().cdf(chi2);
        assert!(p > 0.01, "chi2 = {chi2}, p = {p}");
    }

    #[test]
    fn leaning_groups() {
        let c = corpus(&[
            ("skewed", vec![(Category::Questionable, Appropriate, 4), (Category::Reliable, Appropriate, 1)]),
            ("pure-q", vec![(Category::Questionable, Violent, 3)]),
        ]);
        let profiles = user_profiles(&c).unwrap();
        let g = group_distribution(&profiles, LeaningInterval::QUESTIONABLE_SKEWED, None);
        assert_eq!(g.values, vec![0.0]);
        assert_eq!(g.user_ids, vec!["skewed".to_string()]);
        assert_eq!(g.summary.sd, None);

        let g = group_distribution(&profiles, LeaningInterval::RELIABLE_SKEWED, None);
        assert!(g.values.is_empty() && g.summary.mean.is_none());

        let all = "[0,1]".parse().unwrap();
        let g = group_distribution(&profiles, all, Some(Category::Reliable));
        assert_eq!((g.values.len(), g.excluded_no_target), (1, 1));
    }

    #[test]
    fn interval_notation() {
        let i: LeaningInterval = "(0,0.25]".parse().unwrap();
        assert_eq!(i, LeaningInterval::RELIABLE_SKEWED);
        assert_eq!(LeaningInterval::QUESTIONABLE_SKEWED.to_string(), "[0.75,1)");
        assert!(!i.contains(0.0) && i.contains(0.25));
        assert!(!LeaningInterval::QUESTIONABLE_SKEWED.contains(1.0));
        for bad in ["0,1", "[0.5,0.2]", "[0,2)", "(a,1)"] {
            assert!(bad.parse::<LeaningInterval>().is_err(), "{bad}");
        }
    }

    #[test]
    fn crossing_trolls_make_the_opposite_side_bimodal() {
        // Questionable-leaning users with a latent toxicity near 0.1; a third
        // of them turn toxic (near 0.85) whenever they comment on reliable videos.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut draw = |p: f64, n: usize| (0..n).filter(|_| rng.random::<f64>() < p).count();
        let mut users = Vec::new();
        let ids: Vec<String> = (0..600).map(|k| format!("u{k:04}")).collect();
        for (k, id) in ids.iter().enumerate() {
            let troll = k % 3 == 0;
            let base = 0.05 + 0.1 * (k % 7) as f64 / 7.0;
            let (nq, nr) = (120 + (k * 37) % 200, 20 + (k * 13) % 23);
            let bad_q = draw(base, nq);
            let bad_r = draw(if troll { 0.85 } else { base }, nr);
            users.push((
                id.as_str(),
                vec![
                    (Category::Questionable, Appropriate, nq - bad_q),
                    (Category::Questionable, Offensive, bad_q),
                    (Category::Reliable, Appropriate, nr - bad_r),
                    (Category::Reliable, Violent, bad_r),
                ],
            ));
        }
        let profiles = user_profiles(&corpus(&users)).unwrap();
        let interval = LeaningInterval::QUESTIONABLE_SKEWED;
        let opposite = group_distribution(&profiles, interval, Some(Category::Reliable));
        let same = group_distribution(&profiles, interval, Some(Category::Questionable));
        assert!(opposite.values.len() > 500);
        let t_opp = dip_test(&opposite.values, 1000, 5);
        let t_same = dip_test(&same.values, 1000, 5);
        assert!(t_opp.p_value < 0.05, "{t_opp:?}");
        assert!(t_same.p_value >= 0.05, "{t_same:?}");
    }

    proptest! {
        #[test]
        fn profile_invariants(cells in prop::array::uniform2(prop::array::uniform4(0u64..20)), scale in 1u64..9) {
            prop_assume!(cells.iter().flatten().sum::<u64>() > 0);
            let p = UserProfile::from_counts("u".into(), cells);
            prop_assert!(((p.a + p.i + p.o + p.v) - 1.0).abs() < 1e-9);
            prop_assert!((p.abar - (1.0 - p.a)).abs() < 1e-9);
            prop_assert!((p.abar - (p.i + p.o + p.v)).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&p.l));
            prop_assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
            let scaled = UserProfile::from_counts("u".into(), cells.map(|r| r.map(|n| n * scale)));
            prop_assert!((scaled.x - p.x).abs() < 1e-12 && (scaled.y - p.y).abs() < 1e-12);
            if let Some((tx, ty)) = triangle_projection(&p) {
                prop_assert!((0.0..=1.0).contains(&tx) && (0.0..=SQRT3_2 + 1e-15).contains(&ty));
            }
        }
    }
}
