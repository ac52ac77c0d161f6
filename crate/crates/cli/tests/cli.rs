use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn small(file: &str) -> String {
    fixture("small").join(file).display().to_string()
}

fn threadtox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_threadtox")).args(args).arg("-q").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn corpus_args(comments: &str) -> Vec<String> {
    vec!["--channels".into(), small("channels.csv"), "--videos".into(), small("videos.jsonl"), "--comments".into(), small(comments)]
}

fn run_in(dir: &Path, sub: &str, extra: &[&str], comments: &str) -> Output {
    let mut args: Vec<String> = vec![sub.into()];
    args.extend(corpus_args(comments));
    args.extend(["--out".into(), dir.display().to_string()]);
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    threadtox(&refs)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

/// Every file under `dir`, relative path → bytes.
fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn validate_bundled_fixture() {
    let o = threadtox(&["validate", "--channels", &small("channels.csv"), "--videos", &small("videos.jsonl"), "--comments", &small("comments.jsonl")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&threadtox(&["regress", "--no-such-flag"])), 2);
    assert_eq!(code(&threadtox(&["no-such-command"])), 2);
    assert_eq!(code(&threadtox(&["--help"])), 0);
    // randomized without --seed
    assert_eq!(code(&run_in(dir.path(), "regress", &[], "comments.jsonl")), 2);
    let missing = threadtox(&["validate", "--channels", &small("channels.csv"), "--videos", &small("videos.jsonl"), "--comments", "/no/such/file.jsonl"]);
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/file.jsonl"));
    assert_eq!(code(&run_in(dir.path(), "toxicity", &["--trim", "2"], "comments.jsonl")), 2);
    // analyses needing labels on an unlabeled corpus
    assert_eq!(code(&run_in(dir.path(), "toxicity", &[], "comments_unlabeled.jsonl")), 1);
}

#[test]
fn regress_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(code(&run_in(d.path(), "regress", &["--seed", "7", "--bins", "6"], "comments.jsonl")), 0);
    }
    let ra = std::fs::read(a.path().join("regression.csv")).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join("regression.csv")).unwrap());
    let text = String::from_utf8(ra).unwrap();
    assert!(text.starts_with("model,dataset,x_kind,intercept,intercept_se,slope,slope_se,p_slope,r2,adj_r2,num_obs,stars"));
}

#[test]
fn report_all_index_matches_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "report-all", &["--seed", "5", "--bins", "6", "--bootstrap-repetitions", "50", "--dip-simulations", "50"], "comments.jsonl");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    let on_disk = tree(dir.path());
    let mut listed = BTreeMap::new();
    for t in r["tables"].as_array().unwrap() {
        let path = t["path"].as_str().unwrap();
        assert!(on_disk.contains_key(path), "{path} listed but missing");
        listed.insert(t["name"].as_str().unwrap().to_string(), path.to_string());
    }
    for name in ["breakdown", "delays", "bootstrap", "timeseries", "concentration", "users", "triangle", "density", "leaning", "leaning_stats", "toxicity_bins", "discussions", "regression", "regression_bins"] {
        assert!(listed.contains_key(name), "{name} missing from index");
    }
    for a in r["analyses"].as_array().unwrap() {
        assert_eq!(a["status"], "ok", "{a}");
    }
    let p = &r["provenance"];
    assert_eq!(p["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(p["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(p["corpus_sha256"].as_str().unwrap().len(), 64);
    assert!(on_disk.contains_key("config.toml"));
}

#[test]
fn unlabeled_corpus_reports_breakdown_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "report-all", &["--seed", "1"], "comments_unlabeled.jsonl");
    assert_eq!(code(&o), 0);
    let r = report(dir.path());
    for a in r["analyses"].as_array().unwrap() {
        let expected = if a["name"] == "breakdown" { "ok" } else { "requires_labels" };
        assert_eq!(a["status"], expected, "{a}");
        if expected != "ok" {
            assert_eq!(a["detail"], "requires labels");
        }
    }
    let names: Vec<&str> = r["tables"].as_array().unwrap().iter().map(|t| t["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["breakdown", "breakdown_table"]);
}

#[test]
fn labels_file_attaches() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "toxicity", &["--labels", &small("labels.csv"), "--bins", "5"], "comments_unlabeled.jsonl");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let roles: Vec<String> = report(dir.path())["provenance"]["inputs"].as_array().unwrap().iter().map(|i| i["role"].as_str().unwrap().to_string()).collect();
    assert_eq!(roles, ["channels", "videos", "comments", "labels"]);
}

#[test]
fn synth_breakdown_matches_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"questionable_channels": 1, "reliable_channels": 9, "comments": 4000, "users": {"count": 500}}"#).unwrap();
    let out = dir.path().join("corpus");
    let o = threadtox(&["synth", "--spec", spec.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("breakdown.csv")).unwrap();
    let rows: BTreeMap<String, (u64, u64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), (r[1].parse().unwrap(), r[3].parse().unwrap()))
        })
        .collect();
    assert_eq!(rows["questionable"].0, 1);
    assert_eq!(rows["reliable"].0, 9);
    assert_eq!(rows["total"], (10, 4000));
    let comments = std::fs::read_to_string(out.join("comments.jsonl")).unwrap();
    assert_eq!(comments.lines().count(), 4000);
    // the generated corpus feeds straight back in
    let check = threadtox(&["validate", "--channels", out.join("channels.csv").to_str().unwrap(), "--videos", out.join("videos.jsonl").to_str().unwrap(), "--comments", out.join("comments.jsonl").to_str().unwrap()]);
    assert_eq!(code(&check), 0);
}

#[test]
fn corpus_hash_follows_inputs_and_inputs_are_untouched() {
    let work = tempfile::tempdir().unwrap();
    for f in ["channels.csv", "videos.jsonl", "comments.jsonl"] {
        std::fs::copy(small(f), work.path().join(f)).unwrap();
    }
    let args = |out: &Path| -> Vec<String> {
        vec![
            "toxicity".into(), "--bins".into(), "5".into(),
            "--channels".into(), work.path().join("channels.csv").display().to_string(),
            "--videos".into(), work.path().join("videos.jsonl").display().to_string(),
            "--comments".into(), work.path().join("comments.jsonl").display().to_string(),
            "--out".into(), out.display().to_string(),
        ]
    };
    let hash = |out: &Path| -> String {
        let a = args(out);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(code(&threadtox(&refs)), 0);
        report(out)["provenance"]["corpus_sha256"].as_str().unwrap().to_string()
    };
    let before = tree(work.path());
    let o = tempfile::tempdir().unwrap();
    let h1 = hash(&o.path().join("1"));
    assert_eq!(tree(work.path()), before, "inputs mutated");
    assert_eq!(hash(&o.path().join("2")), h1);
    let mut videos = std::fs::read_to_string(work.path().join("videos.jsonl")).unwrap();
    videos = videos.replacen("Weather today", "Weather tomorrow", 1);
    std::fs::write(work.path().join("videos.jsonl"), videos).unwrap();
    assert_ne!(hash(&o.path().join("3")), h1);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("seed = 3\nbins = 8\nchannels = {:?}\nvideos = {:?}\ncomments = {:?}\n", small("channels.csv"), small("videos.jsonl"), small("comments.jsonl"))).unwrap();
    let out = dir.path().join("o");
    let o = threadtox(&["regress", "--config", cfg.to_str().unwrap(), "--bins", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let snap = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(snap.contains("bins = 5"));
    assert!(snap.contains("seed = 3"));
    assert!(!snap.contains("out ="));
    std::fs::write(&cfg, "nonsense = 1\n").unwrap();
    assert_eq!(code(&threadtox(&["regress", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 1);
}

#[test]
fn annotation_commands() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan");
    // single hits never push a score below zero, so weight the common words too
    let heavy = dir.path().join("heavy.csv");
    std::fs::write(&heavy, "term,penalty\nidiot,3\nstupid,3\nliar,3\nscum,3\nkill,3\nplease,3\nsource,2\n").unwrap();
    let o = run_in(&plan, "plan-annotation", &["--lexicon", heavy.to_str().unwrap(), "--seed", "2", "--annotators", "4", "--evaluation-comments", "30"], "comments.jsonl");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let assignment = std::fs::read_to_string(plan.join("assignment.csv")).unwrap();
    assert!(assignment.starts_with("thread_id,annotator_1,annotator_2\n"));
    let threads = std::fs::read_to_string(plan.join("training_threads.csv")).unwrap();
    assert!(threads.lines().count() > 1);
    assert_eq!(assignment.lines().count(), threads.lines().count());
    let scores = std::fs::read_to_string(plan.join("scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 99);

    let agreement = dir.path().join("agreement");
    let o = threadtox(&["agreement", "--annotations", &small("annotations.csv"), "--out", agreement.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(agreement.join("agreement.json")).unwrap()).unwrap();
    assert_eq!(a["size"], 196);
    assert!(a["alpha"].as_f64().unwrap() <= 1.0);

    for labeler in ["majority", "lexicon", "constant-A"] {
        let cv = dir.path().join(labeler);
        let mut args = vec!["cv", "--annotations"];
        let ann = small("annotations.csv");
        let lex = small("lexicon.csv");
        let com = small("comments.jsonl");
        let ch = small("channels.csv");
        let vi = small("videos.jsonl");
        args.extend([ann.as_str(), "--labeler", labeler, "--lexicon", &lex, "--comments", &com, "--channels", &ch, "--videos", &vi, "--out", cv.to_str().unwrap()]);
        let o = threadtox(&args);
        assert_eq!(code(&o), 0, "{labeler}: {}", String::from_utf8_lossy(&o.stderr));
        let r: Value = serde_json::from_str(&std::fs::read_to_string(cv.join("cv.json")).unwrap()).unwrap();
        assert_eq!(r["folds"].as_array().unwrap().len(), 4);
        assert_eq!(r["micro"]["instances"], 196);
    }
    assert_eq!(code(&threadtox(&["cv", "--annotations", &small("annotations.csv"), "--labeler", "oracle", "--out", dir.path().join("x").to_str().unwrap()])), 2);
}

#[test]
fn collect_from_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let api = fixture("api");
    let run = |out: &Path| {
        let o = threadtox(&["collect", "--keywords", "covid", "--depth", "1", "--fixtures", api.to_str().unwrap(), "--rate", "1000", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    let a = dir.path().join("a");
    run(&a);
    let videos = std::fs::read_to_string(a.join("videos.jsonl")).unwrap();
    let ids: Vec<String> = videos.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()["video_id"].as_str().unwrap().to_string()).collect();
    // vE does not mention the keyword
    assert_eq!(ids, ["vA", "vB", "vC", "vD"]);
    let comments = std::fs::read_to_string(a.join("comments.jsonl")).unwrap();
    assert_eq!(comments.lines().count(), 6);
    assert_eq!(std::fs::read_to_string(a.join("channels.csv")).unwrap(), "channel_id,category\nchan1,reliable\nchan2,reliable\nchan3,reliable\n");
    let r = report(&a);
    assert_eq!(r["summary"]["collect"]["rate_limited"], 1);

    // re-running into the same directory resumes and changes nothing
    let before = tree(&a);
    run(&a);
    assert_eq!(tree(&a).get("comments.jsonl"), before.get("comments.jsonl"));

    let b = dir.path().join("b");
    run(&b);
    assert_eq!(tree(&b).get("comments.jsonl"), before.get("comments.jsonl"));
    let v = threadtox(&["validate", "--channels", a.join("channels.csv").to_str().unwrap(), "--videos", a.join("videos.jsonl").to_str().unwrap(), "--comments", a.join("comments.jsonl").to_str().unwrap()]);
    assert_eq!(code(&v), 0);
}

#[test]
fn report_all_twice_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run_in(d.path(), "report-all", &["--seed", "11", "--bins", "6", "--bootstrap-repetitions", "40", "--dip-simulations", "40"], "comments.jsonl");
        assert_eq!(code(&o), 0);
    }
    assert_eq!(tree(a.path()), tree(b.path()));
}
