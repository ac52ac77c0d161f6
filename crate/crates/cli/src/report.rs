//! Output directory bookkeeping: tables, the JSON index and provenance.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, SNAPSHOT_FILE};

pub const INDEX_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config_file: String,
    pub config_sha256: String,
    /// Digest over every input file's role and content digest.
    pub corpus_sha256: Option<String>,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableEntry {
    pub name: String,
    pub path: String,
    /// Data rows (CSV) or top-level entries (JSON); `None` for text.
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    RequiresLabels,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisEntry {
    pub name: String,
    pub status: Status,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub analyses: Vec<AnalysisEntry>,
    pub tables: Vec<TableEntry>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.analyses.iter().any(|a| a.status == Status::Failed)
    }
}

/// SHA-256 of a file, streamed.
pub fn file_digest(path: &Path) -> anyhow::Result<(u64, String)> {
    let mut f = BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?);
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut n = 0u64;
    loop {
        let k = f.read(&mut buf).with_context(|| format!("cannot read {}", path.display()))?;
        if k == 0 {
            break;
        }
        n += k as u64;
        h.update(&buf[..k]);
    }
    Ok((n, hex::encode(h.finalize())))
}

pub fn digest_inputs(inputs: &[(&str, &Path)]) -> anyhow::Result<(Vec<InputDigest>, Option<String>)> {
    let mut out = Vec::new();
    let mut h = Sha256::new();
    for (role, path) in inputs {
        let (bytes, sha256) = file_digest(path)?;
        h.update(role.as_bytes());
        h.update([0]);
        h.update(sha256.as_bytes());
        h.update(b"\n");
        out.push(InputDigest { role: role.to_string(), path: path.display().to_string(), bytes, sha256 });
    }
    let corpus = (!out.is_empty()).then(|| hex::encode(h.finalize()));
    Ok((out, corpus))
}

/// Collects the files of one run under a single directory.
pub struct Output {
    dir: PathBuf,
    report: Report,
}

impl Output {
    pub fn create(dir: &Path, command: &str, config: &RunConfig, inputs: &[(&str, &Path)]) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let (inputs, corpus) = digest_inputs(inputs)?;
        let provenance = Provenance {
            tool: "threadtox".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.seed,
            config_file: SNAPSHOT_FILE.into(),
            config_sha256: config.sha256(),
            corpus_sha256: corpus,
            inputs,
        };
        std::fs::write(dir.join(SNAPSHOT_FILE), config.snapshot())
            .with_context(|| format!("cannot write {}", dir.join(SNAPSHOT_FILE).display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            report: Report { provenance, analyses: Vec::new(), tables: Vec::new(), summary: BTreeMap::new() },
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    fn index(&mut self, name: &str, file: &str, rows: Option<usize>) {
        self.report.tables.retain(|t| t.name != name);
        self.report.tables.push(TableEntry { name: name.into(), path: file.into(), rows });
    }

    fn create_file(&self, file: &str) -> anyhow::Result<BufWriter<File>> {
        let path = self.dir.join(file);
        Ok(BufWriter::new(File::create(&path).with_context(|| format!("cannot write {}", path.display()))?))
    }

    /// Writes `<name>.csv` from serializable rows.
    pub fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
        let file = format!("{name}.csv");
        let mut w = csv::Writer::from_writer(self.create_file(&file)?);
        let mut n = 0;
        for row in rows {
            w.serialize(row)?;
            n += 1;
        }
        w.flush()?;
        self.index(name, &file, Some(n));
        Ok(())
    }

    /// Writes `<name>.csv` through a caller-supplied writer.
    pub fn csv_with(&mut self, name: &str, rows: usize, write: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
        let file = format!("{name}.csv");
        let mut w = self.create_file(&file)?;
        write(&mut w)?;
        w.flush()?;
        self.index(name, &file, Some(rows));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let file = format!("{name}.json");
        let v = serde_json::to_value(value)?;
        let rows = match &v {
            serde_json::Value::Array(a) => Some(a.len()),
            serde_json::Value::Object(o) => Some(o.len()),
            _ => None,
        };
        let mut w = self.create_file(&file)?;
        serde_json::to_writer_pretty(&mut w, &v)?;
        w.write_all(b"\n")?;
        w.flush()?;
        self.index(name, &file, rows);
        Ok(())
    }

    pub fn text(&mut self, name: &str, file: &str, content: &str) -> anyhow::Result<()> {
        let mut w = self.create_file(file)?;
        w.write_all(content.as_bytes())?;
        w.flush()?;
        self.index(name, file, None);
        Ok(())
    }

    /// Registers a file some other writer produced inside the directory.
    pub fn external(&mut self, name: &str, file: &str, rows: Option<usize>) {
        self.index(name, file, rows);
    }

    pub fn summary<T: Serialize>(&mut self, key: &str, value: &T) -> anyhow::Result<()> {
        self.report.summary.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn status(&mut self, name: &str, status: Status, detail: Option<String>) {
        self.report.analyses.push(AnalysisEntry { name: name.into(), status, detail });
    }

    /// Writes the index; tables are listed in name order.
    pub fn finish(mut self) -> anyhow::Result<Report> {
        self.report.tables.sort_by(|a, b| a.name.cmp(&b.name));
        let path = self.dir.join(INDEX_FILE);
        let mut text = serde_json::to_string_pretty(&self.report)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(self.report)
    }
}
