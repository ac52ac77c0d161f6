//! Run configuration: a TOML file, overridden by command-line flags, and
//! snapshotted next to every run's outputs.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use threadtox::annotation::SelectionCriteria;
use threadtox::behavior::{BinWidth, BootstrapConfig, LeaningInterval};
use threadtox::collector::RemoteConfig;
use threadtox::toxicity::SuiteConfig;

pub const SNAPSHOT_FILE: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub channels: Option<PathBuf>,
    pub videos: Option<PathBuf>,
    pub comments: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// One channel id per line; listed channels become questionable.
    pub questionable_list: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// Left out of the snapshot so that runs into different directories
    /// produce identical trees.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Bins for both toxicity regressions.
    pub bins: usize,
    pub trim: f64,
    pub cutoff_quantile: f64,
    pub category_split: bool,
    pub shuffles: usize,
    /// `week` or `day`.
    pub time_bin: String,
    pub density_bins: usize,
    pub leaning_intervals: Vec<String>,
    pub dip_simulations: usize,
    pub bootstrap: BootstrapSection,
    pub annotation: AnnotationSection,
    pub collect: CollectSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    pub sample_size: usize,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationSection {
    pub annotators: usize,
    pub redundancy: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub min_hateful: f64,
    pub evaluation_comments: usize,
    /// `majority`, `lexicon` or `constant-<A|I|O|V>`.
    pub labeler: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectSection {
    pub keywords: Vec<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub depth: u32,
    pub max_videos: Option<usize>,
    pub requests_per_second: f64,
    /// Replay canned responses from this directory instead of the network.
    pub fixtures: Option<PathBuf>,
    /// Store every live response here in the fixture layout.
    pub record: Option<PathBuf>,
    pub remote: RemoteConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        RunConfig {
            channels: None,
            videos: None,
            comments: None,
            labels: None,
            questionable_list: None,
            annotations: None,
            lexicon: None,
            out: None,
            seed: None,
            bins: suite.position_bins,
            trim: 0.2,
            cutoff_quantile: suite.cutoff_quantile,
            category_split: suite.split_by_category,
            shuffles: suite.shuffles,
            time_bin: "week".into(),
            density_bins: 50,
            leaning_intervals: vec![
                LeaningInterval::RELIABLE_SKEWED.to_string(),
                LeaningInterval::QUESTIONABLE_SKEWED.to_string(),
            ],
            dip_simulations: 1000,
            bootstrap: BootstrapSection::default(),
            annotation: AnnotationSection::default(),
            collect: CollectSection::default(),
        }
    }
}

impl Default for BootstrapSection {
    fn default() -> Self {
        let b = BootstrapConfig::default();
        BootstrapSection { sample_size: b.sample_size, repetitions: b.repetitions }
    }
}

impl Default for AnnotationSection {
    fn default() -> Self {
        let s = SelectionCriteria::default();
        AnnotationSection {
            annotators: 8,
            redundancy: 2,
            min_len: s.min_len,
            max_len: s.max_len,
            min_hateful: s.min_hateful,
            evaluation_comments: 10_543,
            labeler: "majority".into(),
        }
    }
}

impl Default for CollectSection {
    fn default() -> Self {
        CollectSection {
            keywords: threadtox::collector::DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            from: None,
            to: None,
            depth: 1,
            max_videos: None,
            requests_per_second: 5.0,
            fixtures: None,
            record: None,
            remote: RemoteConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.check()?;
        Ok(config)
    }

    /// Rejects values no analysis could use.
    pub fn check(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.bins >= 3, "bins must be at least 3, got {}", self.bins);
        anyhow::ensure!((0.0..1.0).contains(&self.trim), "trim must lie in [0, 1), got {}", self.trim);
        anyhow::ensure!(
            self.cutoff_quantile > 0.0 && self.cutoff_quantile <= 1.0,
            "cutoff_quantile must lie in (0, 1], got {}",
            self.cutoff_quantile
        );
        anyhow::ensure!(self.shuffles >= 1, "shuffles must be at least 1");
        anyhow::ensure!(self.density_bins >= 2, "density_bins must be at least 2");
        anyhow::ensure!(self.dip_simulations >= 1, "dip_simulations must be at least 1");
        anyhow::ensure!(
            self.bootstrap.sample_size >= 1 && self.bootstrap.repetitions >= 1,
            "bootstrap sample_size and repetitions must be at least 1"
        );
        self.time_bin()?;
        self.intervals()?;
        Ok(())
    }

    pub fn time_bin(&self) -> anyhow::Result<BinWidth> {
        self.time_bin.parse().map_err(anyhow::Error::msg)
    }

    pub fn intervals(&self) -> anyhow::Result<Vec<LeaningInterval>> {
        self.leaning_intervals.iter().map(|s| s.parse().map_err(anyhow::Error::msg)).collect()
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            position_bins: self.bins,
            delay_bins: self.bins,
            cutoff_quantile: self.cutoff_quantile,
            split_by_category: self.category_split,
            shuffles: self.shuffles,
        }
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig {
        BootstrapConfig { sample_size: self.bootstrap.sample_size, repetitions: self.bootstrap.repetitions }
    }

    pub fn selection(&self) -> SelectionCriteria {
        SelectionCriteria {
            min_len: self.annotation.min_len,
            max_len: self.annotation.max_len,
            min_hateful: self.annotation.min_hateful,
        }
    }

    /// Canonical TOML of the effective configuration.
    pub fn snapshot(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.snapshot().as_bytes()))
    }
}
