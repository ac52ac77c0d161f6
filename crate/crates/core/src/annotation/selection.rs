//! Choosing which threads (all comments of one video) go to annotators.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{AnnotationError, BasicScore};
use crate::corpus::Corpus;
use crate::seed;

/// Threads identified by video id, in id order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ThreadSet {
    pub video_ids: Vec<String>,
    pub comment_total: usize,
}

impl ThreadSet {
    pub fn len(&self) -> usize {
        self.video_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.video_ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionCriteria {
    pub min_len: usize,
    pub max_len: usize,
    /// Minimum fraction of hateful (score < 0) comments, inclusive.
    pub min_hateful: f64,
}

impl Default for SelectionCriteria {
    fn default() -> Self {
        SelectionCriteria {
            min_len: 10,
            max_len: 500,
            min_hateful: 0.05,
        }
    }
}

impl SelectionCriteria {
    pub fn accepts(&self, len: usize, hateful: usize) -> bool {
        len >= self.min_len
            && len <= self.max_len
            && len > 0
            && hateful as f64 / len as f64 >= self.min_hateful
    }
}

/// Hate-rich training threads: length within bounds and enough hateful comments.
/// `scores` is in corpus comment order.
pub fn select_training_threads(
    corpus: &Corpus,
    scores: &[BasicScore],
    criteria: &SelectionCriteria,
) -> Result<ThreadSet, AnnotationError> {
    if scores.len() != corpus.comments().len() {
        return Err(AnnotationError::ScoreCount(scores.len(), corpus.comments().len()));
    }
    let mut len = vec![0usize; corpus.videos().len()];
    let mut hateful = vec![0usize; corpus.videos().len()];
    for (i, s) in scores.iter().enumerate() {
        let v = corpus.video_of(i);
        len[v] += 1;
        if s.is_hateful() {
            hateful[v] += 1;
        }
    }
    let mut out = ThreadSet::default();
    for (v, video) in corpus.videos().iter().enumerate() {
        if criteria.accepts(len[v], hateful[v]) {
            out.video_ids.push(video.video_id.clone());
            out.comment_total += len[v];
        }
    }
    Ok(out)
}

/// Uniform sample of whole threads, without replacement, until at least
/// `target_comments` comments are covered.
pub fn sample_evaluation_threads(corpus: &Corpus, target_comments: usize, seed: u64) -> ThreadSet {
    let mut len = vec![0usize; corpus.videos().len()];
    for i in 0..corpus.comments().len() {
        len[corpus.video_of(i)] += 1;
    }
    let mut threads: Vec<usize> = (0..len.len()).filter(|&v| len[v] > 0).collect();
    let available: usize = threads.iter().map(|&v| len[v]).sum();
    if target_comments > available {
        log::warn!("target of {target_comments} comments exceeds the {available} available; taking every thread");
    }
    threads.shuffle(&mut seed::rng(seed, &[seed::tag("evaluation-threads")]));

    let mut picked = Vec::new();
    let mut total = 0;
    for v in threads {
        if total >= target_comments {
            break;
        }
        total += len[v];
        picked.push(v);
    }
    picked.sort_unstable();
    ThreadSet {
        video_ids: picked.iter().map(|&v| corpus.videos()[v].video_id.clone()).collect(),
        comment_total: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::Category;
    use rand::{Rng, SeedableRng};

    fn corpus_with_threads(sizes: &[usize]) -> Corpus {
        let mut videos = Vec::new();
        let mut comments = Vec::new();
        for (t, &n) in sizes.iter().enumerate() {
            videos.push(video(&format!("v{t:03}"), "ch", 0));
            for j in 0..n {
                comments.push(comment(&format!("c{t:03}_{j:04}"), &format!("v{t:03}"), "u", 1, None));
            }
        }
        Corpus::new(vec![channel("ch", Category::Reliable)], videos, comments).unwrap()
    }

    fn scores_with_hateful(corpus: &Corpus, hateful_per_thread: &[usize]) -> Vec<BasicScore> {
        let mut seen = vec![0usize; corpus.videos().len()];
        (0..corpus.comments().len())
            .map(|i| {
                let v = corpus.video_of(i);
                seen[v] += 1;
                BasicScore::new(if seen[v] <= hateful_per_thread[v] { -1 } else { 3 })
            })
            .collect()
    }

    #[test]
    fn nine_comment_thread_excluded_and_five_percent_inclusive() {
        let corpus = corpus_with_threads(&[9, 100]);
        let scores = scores_with_hateful(&corpus, &[9, 5]);
        let set = select_training_threads(&corpus, &scores, &SelectionCriteria::default()).unwrap();
        assert_eq!(set.video_ids, vec!["v001".to_string()]);
        assert_eq!(set.comment_total, 100);

        let scores = scores_with_hateful(&corpus, &[9, 4]);
        assert!(select_training_threads(&corpus, &scores, &SelectionCriteria::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn matches_brute_force_filter_on_random_fixture() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let sizes: Vec<usize> = (0..50).map(|_| rng.random_range(1..700)).collect();
        let hateful: Vec<usize> = sizes.iter().map(|&n| rng.random_range(0..=n / 8)).collect();
        let corpus = corpus_with_threads(&sizes);
        let scores = scores_with_hateful(&corpus, &hateful);
        let got = select_training_threads(&corpus, &scores, &SelectionCriteria::default()).unwrap();

        // Oracle: the thread-by-thread rule, written out directly.
        let expected: Vec<String> = (0..50)
            .filter(|&t| sizes[t] >= 10 && sizes[t] <= 500 && (hateful[t] as f64) / (sizes[t] as f64) >= 0.05)
            .map(|t| format!("v{t:03}"))
            .collect();
        assert_eq!(got.video_ids, expected);
        assert!(!expected.is_empty());
    }

    #[test]
    fn score_count_mismatch_is_error() {
        let corpus = corpus_with_threads(&[3]);
        assert!(select_training_threads(&corpus, &[], &SelectionCriteria::default()).is_err());
    }

    #[test]
    fn sampling_basics() {
        let corpus = corpus_with_threads(&[10, 20, 30, 40]);
        assert!(sample_evaluation_threads(&corpus, 0, 1).is_empty());
        assert_eq!(sample_evaluation_threads(&corpus, 25, 9), sample_evaluation_threads(&corpus, 25, 9));
        let s = sample_evaluation_threads(&corpus, 25, 3);
        assert!(s.comment_total >= 25);
        let all = sample_evaluation_threads(&corpus, 1_000, 3);
        assert_eq!((all.len(), all.comment_total), (4, 100));
    }

    #[test]
    fn equal_size_threads_are_included_uniformly() {
        // 20 threads of 10 comments, target 50 → exactly 5 threads per draw,
        // so each thread's inclusion probability is 1/4.
        let corpus = corpus_with_threads(&[10; 20]);
        let draws = 1_000;
        let mut hits = vec![0usize; 20];
        for seed in 0..draws {
            for id in sample_evaluation_threads(&corpus, 50, seed as u64).video_ids {
                hits[id[1..].parse::<usize>().unwrap()] += 1;
            }
        }
        let p = 0.25;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for h in hits {
            assert!((h as f64 - draws as f64 * p).abs() <= 3.0 * sigma, "{h}");
        }
    }
}
