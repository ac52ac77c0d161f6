//! Balanced assignment of whole threads to annotator groups.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{AnnotationError, ThreadSet};
use crate::corpus::Corpus;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Thread {
    pub thread_id: String,
    pub size: usize,
}

/// Threads of a [`ThreadSet`] with their comment counts.
pub fn threads_of(corpus: &Corpus, set: &ThreadSet) -> Vec<Thread> {
    let mut len = vec![0usize; corpus.videos().len()];
    for i in 0..corpus.comments().len() {
        len[corpus.video_of(i)] += 1;
    }
    set.video_ids
        .iter()
        .filter_map(|id| {
            corpus.video_index(id).map(|v| Thread {
                thread_id: id.clone(),
                size: len[v],
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub annotators: Vec<String>,
    /// Every `redundancy`-subset of annotators, as indices into `annotators`.
    pub groups: Vec<Vec<usize>>,
    /// Comments assigned to each group.
    pub group_loads: Vec<usize>,
    /// `(thread_id, group index)` in assignment order.
    pub threads: Vec<(String, usize)>,
}

impl Assignment {
    /// Max/min group load; infinite when some group is empty.
    pub fn load_ratio(&self) -> f64 {
        load_ratio(&self.group_loads)
    }

    pub fn annotators_of(&self, group: usize) -> impl Iterator<Item = &str> {
        self.groups[group].iter().map(|&a| self.annotators[a].as_str())
    }

    /// CSV `thread_id,annotator_1,annotator_2[,...]`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let width = self.groups.first().map_or(2, Vec::len);
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["thread_id".to_string()];
        header.extend((1..=width).map(|i| format!("annotator_{i}")));
        wtr.write_record(&header)?;
        let mut rows = self.threads.clone();
        rows.sort();
        for (thread, g) in rows {
            let mut rec = vec![thread];
            rec.extend(self.annotators_of(g).map(str::to_string));
            wtr.write_record(&rec)?;
        }
        wtr.flush()
    }

    /// CSV of per-group loads (`annotator_1,annotator_2,...,comments`).
    pub fn write_loads_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let width = self.groups.first().map_or(2, Vec::len);
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=width).map(|i| format!("annotator_{i}")).collect();
        header.push("comments".into());
        wtr.write_record(&header)?;
        for (g, load) in self.group_loads.iter().enumerate() {
            let mut rec: Vec<String> = self.annotators_of(g).map(str::to_string).collect();
            rec.push(load.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()
    }
}

pub(crate) fn load_ratio(loads: &[usize]) -> f64 {
    let max = loads.iter().copied().max().unwrap_or(0) as f64;
    let min = loads.iter().copied().min().unwrap_or(0) as f64;
    if min == 0.0 {
        if max == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        max / min
    }
}

fn combinations(k: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, k, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, r, &mut Vec::with_capacity(r), &mut out);
    out
}

/// Greedy balancing: threads by size descending, each to the currently
/// least-loaded annotator group. The seed only breaks ties between groups.
/// Annotators are named `a1..ak`.
pub fn assign_annotators(
    threads: &[Thread],
    k: usize,
    redundancy: usize,
    seed: u64,
) -> Result<Assignment, AnnotationError> {
    if k < 2 || redundancy == 0 || k < redundancy {
        return Err(AnnotationError::TooFewAnnotators { k, redundancy });
    }
    let annotators: Vec<String> = (1..=k).map(|i| format!("a{i}")).collect();
    let groups = combinations(k, redundancy);
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(&mut seed::rng(seed, &[seed::tag("assign-annotators")]));

    let mut sorted: Vec<&Thread> = threads.iter().collect();
    sorted.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.thread_id.cmp(&b.thread_id)));

    let mut loads = vec![0usize; groups.len()];
    let mut assigned = Vec::with_capacity(threads.len());
    for t in sorted {
        let g = *order
            .iter()
            .min_by_key(|&&g| loads[g])
            .expect("at least one group");
        loads[g] += t.size;
        assigned.push((t.thread_id.clone(), g));
    }
    Ok(Assignment {
        annotators,
        groups,
        group_loads: loads,
        threads: assigned,
    })
}
