use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use threadtox::annotation::{
    agreement_report, annotator_fold_cv, assign_annotators, parse_annotations, parse_lexicon,
    sample_evaluation_threads, score_comments, select_training_threads, threads_of, ConstantLabeler, Fixed,
    LexiconLabeler, MajorityClassTrainer, TextIndex, ThreadSet, Trainer,
};
use threadtox::collector::{
    crawl_related, fetch_comments, filter_matching, search_videos, Client, ClientConfig, CrawlLimits, DataSource,
    FetchOptions, FixtureSource, RecordingSource, TimeWindow,
};
use threadtox::corpus::time::parse_timestamp;
use threadtox::corpus::{parse_questionable_list, video_line, write_canonical, CorpusPaths};
use threadtox::toxicity::{expected_position_slope, synth_corpus, SynthSpec};
use threadtox::{Corpus, HateLabel};

use crate::analyses;
use crate::config::RunConfig;
use crate::report::{Output, Status};
use crate::{usage, Cli, Command, EXIT_INVALID, EXIT_OK};

pub(crate) fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    let mut config = cli.common.resolve()?;
    match &cli.command {
        Command::Collect(a) => {
            let c = &mut config.collect;
            if !a.keywords.is_empty() {
                c.keywords = a.keywords.clone();
            }
            c.from = a.from.clone().or(c.from.take());
            c.to = a.to.clone().or(c.to.take());
            c.depth = a.depth.unwrap_or(c.depth);
            c.max_videos = a.max_videos.or(c.max_videos);
            c.fixtures = a.fixtures.clone().or(c.fixtures.take());
            c.record = a.record.clone().or(c.record.take());
            c.requests_per_second = a.rate.unwrap_or(c.requests_per_second);
            collect(&config)
        }
        Command::Ingest => ingest(&config),
        Command::Validate => validate(&config),
        Command::PlanAnnotation(a) => {
            config.annotation.annotators = a.annotators.unwrap_or(config.annotation.annotators);
            config.annotation.evaluation_comments = a.evaluation_comments.unwrap_or(config.annotation.evaluation_comments);
            plan_annotation(&config)
        }
        Command::Agreement => agreement(&config),
        Command::Cv(a) => {
            if let Some(l) = &a.labeler {
                config.annotation.labeler = l.clone();
            }
            cv(&config)
        }
        Command::Delays => single(&config, "delays"),
        Command::Timeseries => single(&config, "timeseries"),
        Command::Concentration => single(&config, "concentration"),
        Command::Users => single(&config, "users"),
        Command::Leaning => single(&config, "leaning"),
        Command::Toxicity => single(&config, "toxicity"),
        Command::Regress => single(&config, "regress"),
        Command::Synth(a) => synth(&config, a.spec.as_deref()),
        Command::ReportAll => report_all(&config),
    }
}

fn out_dir(config: &RunConfig) -> anyhow::Result<&Path> {
    config.out.as_deref().ok_or_else(|| usage("--out is required"))
}

fn require_seed(config: &RunConfig, what: &str) -> anyhow::Result<u64> {
    config.seed.ok_or_else(|| usage(format!("{what} is randomized: pass --seed explicitly")))
}

fn existing<'a>(path: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a Path> {
    let p = path.as_deref().ok_or_else(|| usage(format!("--{flag} is required")))?;
    anyhow::ensure!(p.is_file(), "input file not found: {}", p.display());
    Ok(p)
}

fn optional(path: &Option<PathBuf>) -> anyhow::Result<Option<&Path>> {
    match path.as_deref() {
        Some(p) if !p.is_file() => anyhow::bail!("input file not found: {}", p.display()),
        other => Ok(other),
    }
}

/// Loads the corpus named by the configuration; returns the inputs for provenance.
fn load(config: &RunConfig) -> anyhow::Result<(Corpus, Vec<(&'static str, PathBuf)>)> {
    let channels = existing(&config.channels, "channels")?;
    let videos = existing(&config.videos, "videos")?;
    let comments = existing(&config.comments, "comments")?;
    let labels = optional(&config.labels)?;
    let list = optional(&config.questionable_list)?;
    let paths = CorpusPaths {
        channels: channels.into(),
        videos: videos.into(),
        comments: comments.into(),
        labels: labels.map(Into::into),
        questionable_list: list.map(Into::into),
    };
    let (corpus, attached) = paths.load()?;
    let (c, v, n) = corpus.counts();
    log::info!("loaded {c} channels, {v} videos, {n} comments ({} labeled)", corpus.labeled_count());
    if let Some(a) = attached {
        log::info!("labels attached: {} labeled, {} unknown ids skipped, {} unlabeled", a.labeled, a.unknown, a.unlabeled);
    }
    let mut inputs = vec![("channels", paths.channels), ("videos", paths.videos), ("comments", paths.comments)];
    if let Some(p) = paths.labels {
        inputs.push(("labels", p));
    }
    if let Some(p) = paths.questionable_list {
        inputs.push(("questionable_list", p));
    }
    Ok((corpus, inputs))
}

fn as_refs<'a>(inputs: &'a [(&'static str, PathBuf)]) -> Vec<(&'static str, &'a Path)> {
    inputs.iter().map(|(r, p)| (*r, p.as_path())).collect()
}

fn finish(out: Output) -> anyhow::Result<i32> {
    let report = out.finish()?;
    Ok(if report.failed() { EXIT_INVALID } else { EXIT_OK })
}

fn single(config: &RunConfig, name: &str) -> anyhow::Result<i32> {
    if analyses::randomized(name) {
        require_seed(config, name)?;
    }
    let dir = out_dir(config)?;
    let (corpus, inputs) = load(config)?;
    let mut out = Output::create(dir, name, config, &as_refs(&inputs))?;
    analyses::run(name, &corpus, config, &mut out)?;
    out.status(name, Status::Ok, None);
    finish(out)
}

fn report_all(config: &RunConfig) -> anyhow::Result<i32> {
    require_seed(config, "report-all")?;
    let dir = out_dir(config)?;
    let (corpus, inputs) = load(config)?;
    let mut out = Output::create(dir, "report-all", config, &as_refs(&inputs))?;
    let labeled = corpus.is_fully_labeled();
    for name in analyses::ALL {
        if name != "breakdown" && !labeled {
            out.status(name, Status::RequiresLabels, Some("requires labels".into()));
            continue;
        }
        match analyses::run(name, &corpus, config, &mut out) {
            Ok(()) => out.status(name, Status::Ok, None),
            Err(e) if analyses::is_missing_labels(&e) => {
                out.status(name, Status::RequiresLabels, Some(format!("requires labels: {e:#}")))
            }
            Err(e) => {
                log::error!("{name} failed: {e:#}");
                out.status(name, Status::Failed, Some(format!("{e:#}")));
            }
        }
    }
    finish(out)
}

fn ingest(config: &RunConfig) -> anyhow::Result<i32> {
    let dir = out_dir(config)?;
    let (corpus, inputs) = load(config)?;
    let mut out = Output::create(dir, "ingest", config, &as_refs(&inputs))?;
    let written = write_canonical(&corpus, dir).with_context(|| format!("cannot write corpus into {}", dir.display()))?;
    let (c, v, n) = corpus.counts();
    for (name, path, rows) in [("channels", &written.channels, c), ("videos", &written.videos, v), ("comments", &written.comments, n)] {
        out.external(name, &path.file_name().expect("file name").to_string_lossy(), Some(rows));
    }
    analyses::emit_breakdown(&corpus, &mut out)?;
    out.summary("labeled_comments", &corpus.labeled_count())?;
    out.status("ingest", Status::Ok, None);
    finish(out)
}

#[derive(Serialize)]
struct Validation {
    channels: usize,
    videos: usize,
    comments: usize,
    labeled: usize,
    time_window: Option<(String, String)>,
    negative_delays: usize,
}

fn validate(config: &RunConfig) -> anyhow::Result<i32> {
    let (corpus, inputs) = load(config)?;
    let (channels, videos, comments) = corpus.counts();
    let (_, quality) = threadtox::behavior::delays_of(&corpus);
    let fmt = threadtox::corpus::time::format_timestamp;
    let v = Validation {
        channels,
        videos,
        comments,
        labeled: corpus.labeled_count(),
        time_window: corpus.time_window().map(|(a, b)| (fmt(a), fmt(b))),
        negative_delays: quality.negative_delays,
    };
    log::info!("corpus is valid");
    if let Some(dir) = &config.out {
        let mut out = Output::create(dir, "validate", config, &as_refs(&inputs))?;
        out.json("validation", &v)?;
        out.status("validate", Status::Ok, None);
        return finish(out);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ThreadRow<'a> {
    video_id: &'a str,
    comments: usize,
}

fn thread_rows<'a>(corpus: &Corpus, set: &'a ThreadSet) -> Vec<ThreadRow<'a>> {
    let sizes: BTreeMap<String, usize> = threads_of(corpus, set).into_iter().map(|t| (t.thread_id, t.size)).collect();
    set.video_ids.iter().map(|id| ThreadRow { video_id: id, comments: sizes[id] }).collect()
}

fn plan_annotation(config: &RunConfig) -> anyhow::Result<i32> {
    let seed = require_seed(config, "plan-annotation")?;
    let dir = out_dir(config)?;
    let lexicon_path = existing(&config.lexicon, "lexicon")?;
    let (corpus, mut inputs) = load(config)?;
    inputs.push(("lexicon", lexicon_path.into()));
    let lexicon = parse_lexicon(File::open(lexicon_path)?, &lexicon_path.display().to_string())?;
    if lexicon.is_empty() {
        log::warn!("lexicon is empty: every comment scores +3");
    }
    if corpus.comments().iter().all(|c| c.text.is_none()) {
        log::warn!("corpus carries no comment text: every comment scores +3");
    }
    let mut out = Output::create(dir, "plan-annotation", config, &as_refs(&inputs))?;
    let scores = score_comments(&corpus, &lexicon);

    #[derive(Serialize)]
    struct ScoreRow<'a> {
        comment_id: &'a str,
        score: i8,
    }
    out.csv(
        "scores",
        corpus.comments().iter().zip(&scores).map(|(c, s)| ScoreRow { comment_id: &c.comment_id, score: s.value() }),
    )?;

    let training = select_training_threads(&corpus, &scores, &config.selection())?;
    out.csv("training_threads", thread_rows(&corpus, &training))?;
    let evaluation = sample_evaluation_threads(&corpus, config.annotation.evaluation_comments, seed);
    out.csv("evaluation_threads", thread_rows(&corpus, &evaluation))?;

    let a = &config.annotation;
    let assignment = assign_annotators(&threads_of(&corpus, &training), a.annotators, a.redundancy, seed)?;
    out.csv_with("assignment", assignment.threads.len(), |w| Ok(assignment.write_csv(w)?))?;
    out.csv_with("pair_loads", assignment.group_loads.len(), |w| Ok(assignment.write_loads_csv(w)?))?;
    out.summary(
        "plan",
        &serde_json::json!({
            "training_threads": training.len(),
            "training_comments": training.comment_total,
            "evaluation_threads": evaluation.len(),
            "evaluation_comments": evaluation.comment_total,
            "load_ratio": if assignment.threads.is_empty() { None } else { Some(assignment.load_ratio()) },
        }),
    )?;
    out.status("plan-annotation", Status::Ok, None);
    finish(out)
}

fn annotations(config: &RunConfig) -> anyhow::Result<(PathBuf, Vec<threadtox::annotation::AnnotationRecord>)> {
    let path = existing(&config.annotations, "annotations")?;
    let records = parse_annotations(File::open(path)?, &path.display().to_string())?;
    Ok((path.into(), records))
}

fn agreement(config: &RunConfig) -> anyhow::Result<i32> {
    let dir = out_dir(config)?;
    let (path, records) = annotations(config)?;
    let report = agreement_report(&records)?;
    let mut out = Output::create(dir, "agreement", config, &[("annotations", &path)])?;
    out.json("agreement", &report)?;
    out.status("agreement", Status::Ok, None);
    finish(out)
}

#[derive(Serialize)]
struct FoldRow<'a> {
    annotator: &'a str,
    n_train: usize,
    instances: usize,
    alpha: Option<f64>,
    acc: f64,
    f1_a: Option<f64>,
    f1_i: Option<f64>,
    f1_o: Option<f64>,
    f1_v: Option<f64>,
}

fn run_cv<T: Trainer>(
    trainer: &T,
    records: &[threadtox::annotation::AnnotationRecord],
    texts: &TextIndex,
    out: &mut Output,
) -> anyhow::Result<()> {
    let report = annotator_fold_cv(trainer, records, texts, None);
    let f1 = |m: &threadtox::annotation::PooledMetrics, l: HateLabel| m.f1.get(l.name()).map(|s| s.f1);
    out.csv(
        "cv_folds",
        report.folds.iter().map(|f| FoldRow {
            annotator: &f.annotator,
            n_train: f.n_train,
            instances: f.metrics.instances,
            alpha: f.metrics.alpha,
            acc: f.metrics.acc,
            f1_a: f1(&f.metrics, HateLabel::Appropriate),
            f1_i: f1(&f.metrics, HateLabel::Inappropriate),
            f1_o: f1(&f.metrics, HateLabel::Offensive),
            f1_v: f1(&f.metrics, HateLabel::Violent),
        }),
    )?;
    out.json("cv", &report)
}

fn cv(config: &RunConfig) -> anyhow::Result<i32> {
    let dir = out_dir(config)?;
    let (path, records) = annotations(config)?;
    let mut inputs: Vec<(&'static str, PathBuf)> = vec![("annotations", path)];
    let mut texts = TextIndex::new();
    if config.comments.is_some() {
        let (corpus, more) = load(config)?;
        inputs.extend(more);
        texts = corpus.comments().iter().filter_map(|c| Some((c.comment_id.clone(), c.text.clone()?))).collect();
    }
    let labeler = config.annotation.labeler.as_str();
    let mut out = Output::create(dir, "cv", config, &as_refs(&inputs))?;
    match labeler {
        "majority" => run_cv(&MajorityClassTrainer, &records, &texts, &mut out)?,
        "lexicon" => {
            let p = existing(&config.lexicon, "lexicon")?;
            let lexicon = parse_lexicon(File::open(p)?, &p.display().to_string())?;
            run_cv(&Fixed(LexiconLabeler::new(lexicon)), &records, &texts, &mut out)?
        }
        other => match other.strip_prefix("constant-").map(str::parse::<HateLabel>) {
            Some(Ok(l)) => run_cv(&Fixed(ConstantLabeler(l)), &records, &texts, &mut out)?,
            _ => return Err(usage(format!("unknown labeler '{other}' (majority, lexicon or constant-<A|I|O|V>)"))),
        },
    }
    out.status("cv", Status::Ok, None);
    finish(out)
}

fn synth(config: &RunConfig, spec_path: Option<&Path>) -> anyhow::Result<i32> {
    let seed = require_seed(config, "synth")?;
    let dir = out_dir(config)?;
    let spec: SynthSpec = match spec_path {
        Some(p) => {
            anyhow::ensure!(p.is_file(), "input file not found: {}", p.display());
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).with_context(|| format!("invalid synth spec {}", p.display()))?
        }
        None => SynthSpec::default(),
    };
    let corpus = synth_corpus(&spec, seed)?;
    let inputs: Vec<(&str, &Path)> = spec_path.map(|p| ("spec", p)).into_iter().collect();
    let mut out = Output::create(dir, "synth", config, &inputs)?;
    let written = write_canonical(&corpus, dir).with_context(|| format!("cannot write corpus into {}", dir.display()))?;
    let (c, v, n) = corpus.counts();
    for (name, path, rows) in [("channels", &written.channels, c), ("videos", &written.videos, v), ("comments", &written.comments, n)] {
        out.external(name, &path.file_name().expect("file name").to_string_lossy(), Some(rows));
    }
    out.json("spec", &spec)?;
    out.summary("expected_position_slope", &expected_position_slope(&spec, config.bins))?;
    analyses::emit_breakdown(&corpus, &mut out)?;
    out.status("synth", Status::Ok, None);
    finish(out)
}

fn collect(config: &RunConfig) -> anyhow::Result<i32> {
    let dir = out_dir(config)?;
    let c = &config.collect;
    if c.keywords.is_empty() {
        return Err(usage("at least one keyword is required"));
    }
    let parse = |s: &Option<String>, flag: &str| -> anyhow::Result<Option<i64>> {
        s.as_deref().map(|t| parse_timestamp(t).map_err(|e| usage(format!("--{flag}: {e}")))).transpose()
    };
    let window = TimeWindow { from: parse(&c.from, "from")?, to: parse(&c.to, "to")? };
    let mut source: Box<dyn DataSource> = match &c.fixtures {
        Some(f) => {
            anyhow::ensure!(f.is_dir(), "fixture directory not found: {}", f.display());
            Box::new(FixtureSource::new(f))
        }
        None => remote_source(config)?,
    };
    if let Some(r) = &c.record {
        source = Box::new(RecordingSource::new(source, r));
    }
    let mut out = Output::create(dir, "collect", config, &[])?;
    let client_config = ClientConfig { max_requests_per_second: c.requests_per_second, ..ClientConfig::default() };
    let mut client = Client::new(&mut *source, client_config);

    let found = search_videos(&mut client, &c.keywords, &window)?;
    log::info!("search: {} videos", found.len());
    let limits = CrawlLimits { max_depth: c.depth, max_videos: c.max_videos };
    let crawled = crawl_related(&mut client, &found, limits, Some(&dir.join("crawl_checkpoint.json")))?;
    let mut kept: Vec<_> = filter_matching(&crawled, &c.keywords).into_iter().filter(|v| window.contains(v.published_at)).collect();
    kept.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    log::info!("crawl: {} videos, {} match the keywords", crawled.len(), kept.len());

    let questionable: std::collections::HashSet<String> = match optional(&config.questionable_list)? {
        Some(p) => parse_questionable_list(BufReader::new(File::open(p)?), &p.display().to_string())?.into_iter().collect(),
        None => Default::default(),
    };
    let channels: std::collections::BTreeSet<&str> = kept.iter().map(|v| v.channel_id.as_str()).collect();
    out.csv_with("channels", channels.len(), |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["channel_id", "category"])?;
        for ch in &channels {
            wtr.write_record([*ch, if questionable.contains(*ch) { "questionable" } else { "reliable" }])?;
        }
        Ok(wtr.flush()?)
    })?;
    let mut videos = File::create(dir.join("videos.jsonl"))?;
    for v in &kept {
        writeln!(videos, "{}", video_line(v))?;
    }
    out.external("videos", "videos.jsonl", Some(kept.len()));

    let ids: Vec<String> = kept.iter().map(|v| v.video_id.clone()).collect();
    let checkpoint = dir.join("comments_checkpoint.json");
    let options = FetchOptions { checkpoint: Some(&checkpoint), ..FetchOptions::default() };
    let summary = fetch_comments(&mut client, &ids, &dir.join("comments.jsonl"), options)?;
    out.external("comments", "comments.jsonl", Some(summary.written as usize));
    out.summary("collect", &serde_json::json!({
        "search_results": found.len(),
        "crawled": crawled.len(),
        "kept": kept.len(),
        "comments": summary.written,
        "failed_videos": summary.failed,
        "requests": client.stats().requests,
        "retries": client.stats().retries,
        "rate_limited": client.stats().rate_limited,
    }))?;
    // Videos that kept failing are skipped, not fatal.
    let skipped = (!summary.failed.is_empty()).then(|| format!("{} videos skipped", summary.failed.len()));
    out.status("collect", Status::Ok, skipped);
    finish(out)
}

#[cfg(feature = "remote")]
fn remote_source(config: &RunConfig) -> anyhow::Result<Box<dyn DataSource>> {
    let s = threadtox::collector::HttpSource::from_env(config.collect.remote.clone())?;
    Ok(Box::new(s))
}

#[cfg(not(feature = "remote"))]
fn remote_source(_config: &RunConfig) -> anyhow::Result<Box<dyn DataSource>> {
    Err(usage("this build has no network support (enable the `remote` feature) and no --fixtures directory was given"))
}
