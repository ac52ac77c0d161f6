//! The analyses behind the per-module subcommands and `report-all`, each
//! writing its tables into an [`Output`].

use anyhow::Context;
use serde::Serialize;
use threadtox::behavior::{
    bootstrap_delay, concentration_curve, delay_stats, delays_of, dip_test, group_distribution, joint_density,
    label_timeseries, triangle_projection, user_profiles, GroupKey, Grouping,
};
use threadtox::corpus::time::format_timestamp;
use threadtox::corpus::{breakdown, Category};
use threadtox::toxicity::{
    delay_binned_toxicity, discussion_toxicity, discussions, position_binned_toxicity, regression_suite,
    render_regression_table, write_regression_csv, BinnedToxicity,
};
use threadtox::{seed, AnalysisError, Corpus, HateLabel};

use crate::config::RunConfig;
use crate::report::Output;

/// Analyses in `report-all` order.
pub const ALL: [&str; 8] = ["breakdown", "delays", "timeseries", "concentration", "users", "leaning", "toxicity", "regress"];

pub fn run(name: &str, corpus: &Corpus, config: &RunConfig, out: &mut Output) -> anyhow::Result<()> {
    match name {
        "breakdown" => emit_breakdown(corpus, out),
        "delays" => emit_delays(corpus, config, out),
        "timeseries" => emit_timeseries(corpus, config, out),
        "concentration" => emit_concentration(corpus, out),
        "users" => emit_users(corpus, config, out),
        "leaning" => emit_leaning(corpus, config, out),
        "toxicity" => emit_toxicity(corpus, config, out),
        "regress" => emit_regress(corpus, config, out),
        other => anyhow::bail!("unknown analysis '{other}'"),
    }
}

/// Whether an analysis draws random numbers and so needs `--seed`.
pub fn randomized(name: &str) -> bool {
    matches!(name, "delays" | "leaning" | "regress")
}

/// Whether an error means the corpus lacks labels.
pub fn is_missing_labels(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<AnalysisError>(), Some(AnalysisError::RequiresLabels { .. } | AnalysisError::UnlabeledComment(_)))
    })
}

fn seed_of(config: &RunConfig) -> anyhow::Result<u64> {
    config.seed.context("this analysis is randomized and needs --seed")
}

fn categories(config: &RunConfig) -> Vec<Option<Category>> {
    let mut v = vec![None];
    if config.category_split {
        v.extend(Category::ALL.map(Some));
    }
    v
}

fn scope(c: Option<Category>) -> &'static str {
    c.map_or("all", Category::as_str)
}

#[derive(Serialize)]
struct BreakdownCsv<'a> {
    row: &'a str,
    channels: u64,
    videos: u64,
    comments: u64,
    channel_pct: f64,
    video_pct: f64,
    comment_pct: f64,
}

pub fn emit_breakdown(corpus: &Corpus, out: &mut Output) -> anyhow::Result<()> {
    let table = breakdown(corpus);
    out.csv(
        "breakdown",
        table.rows().map(|r| BreakdownCsv {
            row: r.name(),
            channels: r.channels,
            videos: r.videos,
            comments: r.comments,
            channel_pct: r.channel_pct,
            video_pct: r.video_pct,
            comment_pct: r.comment_pct,
        }),
    )?;
    out.text("breakdown_table", "breakdown.txt", &table.render())?;
    out.summary("breakdown", &table)
}

#[derive(Serialize)]
struct HistogramCsv {
    series: String,
    lo_hours: f64,
    hi_hours: f64,
    count: u64,
    fraction: f64,
}

/// Delays on doubling bins from 1 minute up, plus a first bin for `< 1 min`.
fn delay_histogram(corpus: &Corpus, delays: &[f64]) -> Vec<HistogramCsv> {
    let edges: Vec<f64> = std::iter::once(0.0).chain((0..=20).map(|k| 2f64.powi(k) / 60.0)).collect();
    let mut rows = Vec::new();
    for c in [None, Some(Category::Questionable), Some(Category::Reliable)] {
        let mut counts = vec![0u64; edges.len()];
        let mut total = 0u64;
        for (i, &d) in delays.iter().enumerate() {
            if d.is_nan() || c.is_some_and(|c| corpus.comment_category(i) != c) {
                continue;
            }
            let k = edges.partition_point(|&e| e <= d).saturating_sub(1);
            counts[k] += 1;
            total += 1;
        }
        for (k, &n) in counts.iter().enumerate() {
            rows.push(HistogramCsv {
                series: scope(c).into(),
                lo_hours: edges[k],
                hi_hours: edges.get(k + 1).copied().unwrap_or(f64::INFINITY),
                count: n,
                fraction: if total == 0 { 0.0 } else { n as f64 / total as f64 },
            });
        }
    }
    rows
}

pub fn emit_delays(corpus: &Corpus, config: &RunConfig, out: &mut Output) -> anyhow::Result<()> {
    let seed = seed_of(config)?;
    let labeled = corpus.is_fully_labeled();
    let mut groupings = vec![Grouping::All, Grouping::Category];
    if labeled {
        groupings.extend([Grouping::Label, Grouping::LabelAndCategory]);
    }
    let mut stats = Vec::new();
    let mut quality = None;
    for g in groupings {
        let (s, q) = delay_stats(corpus, g, config.trim)?;
        stats.extend(s);
        quality = Some(q);
    }
    let flagged: Vec<&str> = stats.iter().filter(|s| s.flagged()).map(|s| s.group.as_str()).collect();
    out.summary("delay_groups_flagged", &flagged)?;
    out.csv("delays", &stats)?;
    out.summary("delay_quality", &quality)?;

    let mut boots = Vec::new();
    let mut skipped = Vec::new();
    for c in [None, Some(Category::Questionable), Some(Category::Reliable)] {
        match bootstrap_delay(corpus, GroupKey { label: None, category: c }, config.bootstrap_config(), seed) {
            Ok(b) => boots.push(b),
            Err(AnalysisError::EmptyGroup(g)) => skipped.push(g),
            Err(e) => return Err(e.into()),
        }
    }
    out.csv("bootstrap", &boots)?;
    if !skipped.is_empty() {
        out.summary("bootstrap_skipped", &skipped)?;
    }
    let (delays, _) = delays_of(corpus);
    out.csv("delay_histogram", delay_histogram(corpus, &delays))
}

#[derive(Serialize)]
struct SeriesCsv {
    series: String,
    x: String,
    y: Option<f64>,
    n: u64,
}

pub fn emit_timeseries(corpus: &Corpus, config: &RunConfig, out: &mut Output) -> anyhow::Result<()> {
    let width = config.time_bin()?;
    let mut rows = Vec::new();
    for c in categories(config) {
        for bin in label_timeseries(corpus, width, c)? {
            for l in HateLabel::ALL {
                rows.push(SeriesCsv {
                    series: format!("{}/{}", scope(c), l.code()),
                    x: format_timestamp(bin.start),
                    y: bin.proportions.map(|p| p[l.index()]),
                    n: bin.total(),
                });
            }
        }
    }
    out.csv("timeseries", rows)
}

#[derive(Serialize)]
struct ConcentrationCsv<'a> {
    rank: usize,
    channel_id: &'a str,
    comments: u64,
    channel_share: f64,
    comment_share: f64,
    share_a: Option<f64>,
    share_i: Option<f64>,
    share_o: Option<f64>,
    share_v: Option<f64>,
    questionable_share: Option<f64>,
}

pub fn emit_concentration(corpus: &Corpus, out: &mut Output) -> anyhow::Result<()> {
    let per_label = corpus.is_fully_labeled();
    let curve = concentration_curve(corpus, per_label)?;
    out.csv(
        "concentration",
        curve.points.iter().map(|p| {
            let l = p.label_share.unwrap_or([None; 4]);
            ConcentrationCsv {
                rank: p.rank,
                channel_id: &p.channel_id,
                comments: p.comments,
                channel_share: p.channel_share,
                comment_share: p.comment_share,
                share_a: l[0],
                share_i: l[1],
                share_o: l[2],
                share_v: l[3],
                questionable_share: p.questionable_share,
            }
        }),
    )?;
    let top: Vec<(f64, f64)> = [0.01, 0.05, 0.1, 0.2].iter().map(|&f| (f, curve.comment_share_at(f))).collect();
    out.summary("concentration_top_share", &top)?;
    out.summary("concentration_silent_channels", &curve.silent_channels)
}

#[derive(Serialize)]
struct TriangleCsv<'a> {
    user_id: &'a str,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct DensityCsv {
    ix: usize,
    iy: usize,
    x0: f64,
    y0: f64,
    count: u64,
}

pub fn emit_users(corpus: &Corpus, config: &RunConfig, out: &mut Output) -> anyhow::Result<()> {
    let profiles = user_profiles(corpus)?;
    out.csv("users", &profiles)?;
    let mut excluded = 0usize;
    let mut tri = Vec::new();
    for p in &profiles {
        match triangle_projection(p) {
            Some((x, y)) => tri.push(TriangleCsv { user_id: &p.user_id, x, y }),
            None => excluded += 1,
        }
    }
    out.csv("triangle", tri)?;
    out.summary("triangle_excluded_only_inappropriate", &excluded)?;
    let grid = joint_density(&profiles, config.density_bins, config.density_bins)?;
    let mut cells = Vec::with_capacity(grid.bins_x * grid.bins_y);
    for iy in 0..grid.bins_y {
        for ix in 0..grid.bins_x {
            let (x0, y0) = grid.cell_origin(ix, iy);
            cells.push(DensityCsv { ix, iy, x0, y0, count: grid.counts[iy][ix] });
        }
    }
    out.csv("density", cells)?;
    out.summary("users", &profiles.len())
}

#[derive(Serialize)]
struct LeaningValueCsv {
    interval: String,
    target: &'static str,
    user_id: String,
    abar: f64,
}

#[derive(Serialize)]
struct LeaningStatsCsv {
    interval: String,
    target: String,
    n: usize,
    mean: Option<f64>,
    sd: Option<f64>,
    skewness: Option<f64>,
    excluded_no_target: usize,
    dip: Option<f64>,
    dip_p: Option<f64>,
}

pub fn emit_leaning(corpus: &Corpus, config: &RunConfig, out: &mut Output) -> anyhow::Result<()> {
    let seed = seed_of(config)?;
    let profiles = user_profiles(corpus)?;
    let mut values = Vec::new();
    let mut stats = Vec::new();
    for (k, interval) in config.intervals()?.into_iter().enumerate() {
        for (t, target) in [None, Some(Category::Questionable), Some(Category::Reliable)].into_iter().enumerate() {
            let g = group_distribution(&profiles, interval, target);
            let dip = (g.values.len() >= 4).then(|| {
                dip_test(&g.values, config.dip_simulations, seed::derive(seed, &[seed::tag("leaning-dip"), k as u64, t as u64]))
            });
            for (u, v) in g.user_ids.iter().zip(&g.values) {
                values.push(LeaningValueCsv {
                    interval: g.interval.clone(),
                    target: scope(target),
                    user_id: u.clone(),
                    abar: *v,
                });
            }
            stats.push(LeaningStatsCsv {
                interval: g.interval.clone(),
                target: scope(target).into(),
                n: g.summary.n,
                mean: g.summary.mean,
                sd: g.summary.sd,
                skewness: g.summary.skewness,
                excluded_no_target: g.excluded_no_target,
                dip: dip.map(|d| d.dip),
                dip_p: dip.map(|d| d.p_value),
            });
        }
    }
    out.csv("leaning", values)?;
    out.csv("leaning_stats", stats)
}

#[derive(Serialize)]
struct BinCsv {
    scope: String,
    x_kind: &'static str,
    x: usize,
    lo: f64,
    hi: f64,
    count: u64,
    y: f64,
}

fn bin_rows<'a>(scope: &'a str, b: &'a BinnedToxicity) -> impl Iterator<Item = BinCsv> + 'a {
    b.bins.iter().map(move |bin| BinCsv {
        scope: scope.to_string(),
        x_kind: b.x_kind.as_str(),
        x: bin.x,
        lo: bin.lo,
        hi: bin.hi,
        count: bin.count,
        y: bin.y,
    })
}

#[derive(Serialize)]
struct DiscussionCsv<'a> {
    video_id: &'a str,
    category: &'a str,
    n: usize,
    toxicity: f64,
}

pub fn emit_toxicity(corpus: &Corpus, config: &RunConfig, out: &mut Output) -> anyhow::Result<()> {
    let position = position_binned_toxicity(corpus, config.bins)?;
    let delay = delay_binned_toxicity(corpus, config.bins, config.cutoff_quantile)?;
    out.csv("toxicity_bins", bin_rows("all", &position).chain(bin_rows("all", &delay)))?;
    out.summary(
        "toxicity_delay_cutoff",
        &serde_json::json!({
            "quantile": config.cutoff_quantile,
            "hours": delay.cutoff,
            "above_cutoff": delay.above_cutoff,
            "negative_delays": delay.negative_delays,
        }),
    )?;
    let ds = discussions(corpus);
    let mut rows = Vec::with_capacity(ds.len());
    for d in &ds {
        let v = corpus.video_index(&d.video_id).expect("discussion of a known video");
        rows.push(DiscussionCsv {
            video_id: &d.video_id,
            category: corpus.video_category(v).as_str(),
            n: d.len(),
            toxicity: discussion_toxicity(corpus, d)?,
        });
    }
    out.csv("discussions", rows)
}

pub fn emit_regress(corpus: &Corpus, config: &RunConfig, out: &mut Output) -> anyhow::Result<()> {
    let seed = seed_of(config)?;
    let suite = regression_suite(corpus, &config.suite(), seed)?;
    let rows = suite.rows.len();
    out.csv_with("regression", rows, |w| Ok(write_regression_csv(&suite.rows, w)?))?;
    out.text("regression_table", "regression.txt", &render_regression_table(&suite.rows))?;
    let mut bins = Vec::new();
    for t in &suite.bins {
        let scope = format!("{}/{}", t.model.as_str(), t.dataset.as_str());
        bins.extend(bin_rows(&scope, &t.binned));
    }
    out.csv("regression_bins", bins)?;
    if !suite.null_bands.is_empty() {
        out.csv(
            "null_bands",
            suite.null_bands.iter().map(|b| NullCsv {
                    dataset: b.dataset.as_str(),
                    x_kind: b.x_kind.as_str(),
                    shuffles: b.shuffles,
                    slope_mean: b.slope_mean,
                    slope_sd: b.slope_sd,
                    slope_q025: b.slope_q025,
                    slope_q975: b.slope_q975,
            }),
        )?;
    }
    out.summary("regression_notes", &suite.notes)
}

#[derive(Serialize)]
struct NullCsv {
    dataset: &'static str,
    x_kind: &'static str,
    shuffles: usize,
    slope_mean: f64,
    slope_sd: f64,
    slope_q025: f64,
    slope_q975: f64,
}
