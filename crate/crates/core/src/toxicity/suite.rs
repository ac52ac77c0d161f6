use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::binning::{bin_delays, bin_positions, Features};
use super::{fit_bins, stars, BinnedToxicity, RegressionResult, XKind};
use crate::corpus::{Category, Corpus};
use crate::error::AnalysisError;
use crate::seed;
use crate::stats::{mean, quantile, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Real,
    Random,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Real => "real",
            Model::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    All,
    Questionable,
    Reliable,
}

impl Dataset {
    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::All => "all",
            Dataset::Questionable => "questionable",
            Dataset::Reliable => "reliable",
        }
    }

    pub fn category(self) -> Option<Category> {
        match self {
            Dataset::All => None,
            Dataset::Questionable => Some(Category::Questionable),
            Dataset::Reliable => Some(Category::Reliable),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub position_bins: usize,
    pub delay_bins: usize,
    pub cutoff_quantile: f64,
    pub split_by_category: bool,
    /// Shuffles per dataset; the first feeds the `random` rows, all of them
    /// feed the null bands when there are at least two.
    pub shuffles: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            position_bins: 24,
            delay_bins: 24,
            cutoff_quantile: 0.99,
            split_by_category: true,
            shuffles: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionRow {
    pub model: Model,
    pub dataset: Dataset,
    pub x_kind: XKind,
    pub result: RegressionResult,
}

/// Spread of the slopes fitted on independently shuffled labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullBand {
    pub dataset: Dataset,
    pub x_kind: XKind,
    pub shuffles: usize,
    pub slope_mean: f64,
    pub slope_sd: f64,
    pub slope_q025: f64,
    pub slope_q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinTable {
    pub model: Model,
    pub dataset: Dataset,
    pub binned: BinnedToxicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionSuite {
    pub config: SuiteConfig,
    pub rows: Vec<RegressionRow>,
    pub bins: Vec<BinTable>,
    pub null_bands: Vec<NullBand>,
    /// Omitted rows and why.
    pub notes: Vec<String>,
}

struct Cell {
    dataset: Dataset,
    shuffle: Option<usize>,
    position: BinnedToxicity,
    delay: BinnedToxicity,
}

/// Real and shuffled-label regressions of binned toxicity on position and
/// delay, for all comments and optionally per channel category.
pub fn regression_suite(corpus: &Corpus, config: &SuiteConfig, seed: u64) -> Result<RegressionSuite, AnalysisError> {
    if config.position_bins == 0 || config.delay_bins == 0 {
        return Err(AnalysisError::InvalidParameter("bin count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&config.cutoff_quantile) {
        return Err(AnalysisError::InvalidParameter(format!(
            "cutoff quantile {} outside [0, 1]",
            config.cutoff_quantile
        )));
    }
    let features = Features::of(corpus)?;
    let datasets: &[Dataset] = if config.split_by_category {
        &[Dataset::All, Dataset::Questionable, Dataset::Reliable]
    } else {
        &[Dataset::All]
    };

    let mut notes = Vec::new();
    let mut selections = Vec::new();
    for &d in datasets {
        let sel = features.select(d.category());
        if sel.is_empty() {
            notes.push(format!("{}: no comments, rows omitted", d.as_str()));
        } else {
            selections.push((d, sel));
        }
    }

    let jobs: Vec<(usize, Option<usize>)> = (0..selections.len())
        .flat_map(|k| std::iter::once((k, None)).chain((0..config.shuffles).map(move |s| (k, Some(s)))))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(k, shuffle)| {
            let (dataset, sel) = &selections[k];
            let toxicity = match shuffle {
                None => std::borrow::Cow::Borrowed(&features.toxicity),
                Some(s) => {
                    let mut t = features.toxicity.clone();
                    let mut values: Vec<u8> = sel.iter().map(|&i| t[i as usize]).collect();
                    let mut rng = seed::rng(seed, &[seed::tag("suite-shuffle"), seed::tag(dataset.as_str()), s as u64]);
                    values.shuffle(&mut rng);
                    for (&i, v) in sel.iter().zip(values) {
                        t[i as usize] = v;
                    }
                    std::borrow::Cow::Owned(t)
                }
            };
            Cell {
                dataset: *dataset,
                shuffle,
                position: bin_positions(&features.position, &toxicity, sel, config.position_bins),
                delay: bin_delays(&features.delay, &toxicity, sel, config.delay_bins, config.cutoff_quantile),
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut bins = Vec::new();
    let mut null_bands = Vec::new();
    for (dataset, _) in &selections {
        let mine = || cells.iter().filter(move |c| c.dataset == *dataset);
        for x_kind in XKind::ALL {
            let pick = |c: &Cell| -> BinnedToxicity {
                match x_kind {
                    XKind::Position => c.position.clone(),
                    XKind::Delay => c.delay.clone(),
                }
            };
            for (model, shuffle) in [(Model::Real, None), (Model::Random, Some(0))] {
                let Some(cell) = mine().find(|c| c.shuffle == shuffle) else { continue };
                let binned = pick(cell);
                match fit_bins(&binned.bins) {
                    Ok(result) => rows.push(RegressionRow { model, dataset: *dataset, x_kind, result }),
                    Err(e) => notes.push(format!(
                        "{}/{}/{}: {e}, row omitted",
                        model.as_str(),
                        dataset.as_str(),
                        x_kind.as_str()
                    )),
                }
                bins.push(BinTable { model, dataset: *dataset, binned });
            }
            if config.shuffles >= 2 {
                let slopes: Vec<f64> = mine()
                    .filter(|c| c.shuffle.is_some())
                    .filter_map(|c| fit_bins(&pick(c).bins).ok())
                    .map(|r| r.slope)
                    .collect();
                if slopes.len() >= 2 {
                    null_bands.push(NullBand {
                        dataset: *dataset,
                        x_kind,
                        shuffles: slopes.len(),
                        slope_mean: mean(&slopes).expect("non-empty"),
                        slope_sd: sample_sd(&slopes).expect("two slopes"),
                        slope_q025: quantile(&slopes, 0.025).expect("non-empty"),
                        slope_q975: quantile(&slopes, 0.975).expect("non-empty"),
                    });
                }
            }
        }
    }
    Ok(RegressionSuite {
        config: config.clone(),
        rows,
        bins,
        null_bands,
        notes,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    model: &'a str,
    dataset: &'a str,
    x_kind: &'a str,
    intercept: f64,
    intercept_se: f64,
    slope: f64,
    slope_se: f64,
    p_slope: f64,
    r2: f64,
    adj_r2: f64,
    num_obs: usize,
    stars: &'a str,
}

pub fn write_regression_csv<W: Write>(rows: &[RegressionRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        let r = &row.result;
        w.serialize(CsvRow {
            model: row.model.as_str(),
            dataset: row.dataset.as_str(),
            x_kind: row.x_kind.as_str(),
            intercept: r.intercept,
            intercept_se: r.intercept_se,
            slope: r.slope,
            slope_se: r.slope_se,
            p_slope: r.slope_p,
            r2: r.r2,
            adj_r2: r.adj_r2,
            num_obs: r.num_obs,
            stars: stars(r.slope_p),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Text tables in the usual regression-table layout, one per dataset and
/// regressor: real and random columns, standard errors in parentheses.
pub fn render_regression_table(rows: &[RegressionRow]) -> String {
    let mut out = String::new();
    let mut seen = Vec::new();
    for row in rows {
        if !seen.contains(&(row.dataset, row.x_kind)) {
            seen.push((row.dataset, row.x_kind));
        }
    }
    for (dataset, x_kind) in seen {
        let cols: Vec<(Model, Option<&RegressionResult>)> = [Model::Real, Model::Random]
            .into_iter()
            .map(|m| {
                let r = rows
                    .iter()
                    .find(|r| r.dataset == dataset && r.x_kind == x_kind && r.model == m)
                    .map(|r| &r.result);
                (m, r)
            })
            .collect();
        let cell = |f: &dyn Fn(&RegressionResult) -> String| -> Vec<String> {
            cols.iter().map(|(_, r)| r.map_or_else(String::new, f)).collect()
        };
        let lines: Vec<(&str, Vec<String>)> = vec![
            ("(Intercept)", cell(&|r| format!("{:.4}{}", r.intercept, stars(r.intercept_p)))),
            ("", cell(&|r| format!("({:.4})", r.intercept_se))),
            ("x", cell(&|r| format!("{:.4}{}", r.slope, stars(r.slope_p)))),
            ("", cell(&|r| format!("({:.4})", r.slope_se))),
            ("R^2", cell(&|r| format!("{:.4}", r.r2))),
            ("Adj. R^2", cell(&|r| format!("{:.4}", r.adj_r2))),
            ("Num. obs.", cell(&|r| r.num_obs.to_string())),
        ];
        out.push_str(&format!("{} / {}\n", dataset.as_str(), x_kind.as_str()));
        out.push_str(&format!("{:<12}{:>14}{:>14}\n", "", "Real", "Random"));
        for (name, values) in lines {
            out.push_str(&format!("{name:<12}{:>14}{:>14}\n", values[0], values[1]));
        }
        out.push_str("*** p < 0.001; ** p < 0.01; * p < 0.05\n\n");
    }
    out
}
