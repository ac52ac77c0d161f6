//! Command-line front end: argument parsing, configuration merging, exit
//! codes and the subcommands.

pub mod analyses;
mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Successful run.
pub const EXIT_OK: i32 = 0;
/// Invalid input data, missing files or a failed analysis.
pub const EXIT_INVALID: i32 = 1;
/// Bad invocation: unknown flag, missing required flag, malformed value.
pub const EXIT_USAGE: i32 = 2;

/// An error caused by the invocation rather than by the data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "threadtox", version, about = "Toxicity measurement pipeline for comment threads")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub channels: Option<PathBuf>,
    #[arg(long, global = true)]
    pub videos: Option<PathBuf>,
    #[arg(long, global = true)]
    pub comments: Option<PathBuf>,
    /// labels.csv attached after loading
    #[arg(long, global = true)]
    pub labels: Option<PathBuf>,
    /// Channel ids (one per line) to mark questionable
    #[arg(long, global = true)]
    pub questionable_list: Option<PathBuf>,
    #[arg(long, global = true)]
    pub annotations: Option<PathBuf>,
    /// lexicon.csv for the basic scorer
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Bins for the toxicity regressions
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Upper trim fraction for delay means
    #[arg(long, global = true)]
    pub trim: Option<f64>,
    /// Also analyse questionable and reliable channels separately
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub category_split: Option<bool>,
    /// Label shuffles per dataset for the random model
    #[arg(long, global = true)]
    pub shuffles: Option<usize>,
    /// Delay quantile bounding the delay bins
    #[arg(long, global = true)]
    pub cutoff_quantile: Option<f64>,
    /// `week` or `day`
    #[arg(long, global = true)]
    pub time_bin: Option<String>,
    #[arg(long, global = true)]
    pub density_bins: Option<usize>,
    /// Leaning interval such as `(0,0.25]`; repeat for several
    #[arg(long = "interval", global = true)]
    pub intervals: Vec<String>,
    #[arg(long, global = true)]
    pub bootstrap_repetitions: Option<usize>,
    #[arg(long, global = true)]
    pub dip_simulations: Option<usize>,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Errors only
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search, crawl related videos and download comments
    Collect(CollectArgs),
    /// Load, validate and rewrite a corpus in canonical form
    Ingest,
    /// Check a corpus and report its counts
    Validate,
    /// Score comments, select threads and assign annotators
    PlanAnnotation(PlanArgs),
    /// Krippendorff's alpha and percent agreement of an annotation set
    Agreement,
    /// Annotator-fold cross validation of a labeler
    Cv(CvArgs),
    /// Delay statistics, trimmed means and bootstrap
    Delays,
    /// Label proportions over time
    Timeseries,
    /// Channel concentration curve
    Concentration,
    /// Per-user profiles, projections and density grid
    Users,
    /// Non-appropriate fraction of leaning groups
    Leaning,
    /// Discussion toxicity and binned toxicity tables
    Toxicity,
    /// Real and shuffled-label regressions
    Regress,
    /// Generate a synthetic labeled corpus
    Synth(SynthArgs),
    /// Every corpus analysis into one report
    ReportAll,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Comma-separated search keywords
    #[arg(long, value_delimiter = ',')]
    pub keywords: Vec<String>,
    /// Earliest publication time (ISO-8601)
    #[arg(long)]
    pub from: Option<String>,
    /// Latest publication time (ISO-8601)
    #[arg(long)]
    pub to: Option<String>,
    /// Related-video crawl depth
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub max_videos: Option<usize>,
    /// Replay responses from a fixture directory
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Record live responses into a fixture directory
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Request rate limit per second
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub annotators: Option<usize>,
    /// Comments to sample for the evaluation set
    #[arg(long)]
    pub evaluation_comments: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// `majority`, `lexicon` or `constant-<A|I|O|V>`
    #[arg(long)]
    pub labeler: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator spec (JSON); defaults apply to missing fields
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

impl Common {
    /// Config file (or defaults) with these flags applied on top.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    c.$field = v.clone().into();
                })*
            };
        }
        set!(channels, videos, comments, labels, questionable_list, annotations, lexicon, out, seed);
        set!(bins, trim, category_split, shuffles, cutoff_quantile, time_bin, density_bins, dip_simulations);
        if let Some(r) = self.bootstrap_repetitions {
            c.bootstrap.repetitions = r;
        }
        if !self.intervals.is_empty() {
            c.leaning_intervals = self.intervals.clone();
        }
        c.check().map_err(|e| usage(e.to_string()))?;
        Ok(c)
    }
}

fn init_logging(common: &Common) {
    let level = if common.quiet {
        "error"
    } else {
        match common.verbose {
            0 => "info",
            1 => "debug",
            _ => "trace",
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(&cli.common);
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            let usage_error = e.chain().any(|c| c.downcast_ref::<UsageError>().is_some());
            eprintln!("error: {e:#}");
            if usage_error {
                eprintln!("run `threadtox --help` for usage");
                EXIT_USAGE
            } else {
                EXIT_INVALID
            }
        }
    }
}
