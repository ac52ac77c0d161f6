//! Discussion toxicity, binned toxicity regressions, shuffled-label nulls and
//! the synthetic corpus generator.

mod binning;
mod ols;
mod suite;
mod synth;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{require_labels, AnalysisError};
use crate::seed;

pub use binning::{
    delay_binned_toxicity, log_edges, position_binned_toxicity, BinnedToxicity, ToxicityBin, XKind,
};
pub use ols::{fit_bins, ols_fit, stars, RegressionResult};
pub use suite::{
    regression_suite, render_regression_table, write_regression_csv, Dataset, Model, NullBand,
    RegressionRow, RegressionSuite, SuiteConfig,
};
pub use synth::{
    expected_position_slope, synth_corpus, DelaySpec, DiscussionSpec, EscalationSpec, LeaningComponent,
    SynthError, SynthSpec, UserSpec,
};

/// One video's comments in chronological order (ties by comment id).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discussion {
    pub video_id: String,
    /// Comment indices into the corpus.
    pub comments: Vec<u32>,
}

impl Discussion {
    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }
}

/// Every video with at least one comment, in video id order.
pub fn discussions(corpus: &Corpus) -> Vec<Discussion> {
    corpus
        .comments_by_video()
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_empty())
        .map(|(v, mut comments)| {
            // Indices are in comment id order, so a stable sort keeps id as tiebreak.
            comments.sort_by_key(|&i| corpus.comments()[i as usize].published_at);
            Discussion {
                video_id: corpus.videos()[v].video_id.clone(),
                comments,
            }
        })
        .collect()
}

/// Mean toxicity value of a discussion's comments.
pub fn discussion_toxicity(corpus: &Corpus, discussion: &Discussion) -> Result<f64, AnalysisError> {
    if discussion.is_empty() {
        return Err(AnalysisError::EmptyGroup(format!("discussion {}", discussion.video_id)));
    }
    let mut sum = 0u64;
    for &i in &discussion.comments {
        let c = &corpus.comments()[i as usize];
        let label = c.label.ok_or_else(|| AnalysisError::UnlabeledComment(c.comment_id.clone()))?;
        sum += u64::from(label.toxicity());
    }
    Ok(sum as f64 / discussion.len() as f64)
}

/// 1-based chronological position of every comment within its discussion.
pub fn comment_positions(corpus: &Corpus) -> Vec<u32> {
    let mut positions = vec![0u32; corpus.comments().len()];
    for d in discussions(corpus) {
        for (k, &i) in d.comments.iter().enumerate() {
            positions[i as usize] = k as u32 + 1;
        }
    }
    positions
}

/// Uniform random permutation of the labels across all comments.
pub fn shuffle_labels(corpus: &Corpus, seed: u64) -> Result<Corpus, AnalysisError> {
    require_labels(corpus, "label shuffling")?;
    let mut labels = corpus.labels();
    labels.shuffle(&mut seed::rng(seed, &[seed::tag("shuffle-labels")]));
    Ok(corpus.clone().with_labels(&labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::Category;
    use crate::label::HateLabel::{self, *};
    use proptest::prelude::*;

    fn thread(labels: &[(i64, Option<HateLabel>)]) -> Corpus {
        let comments = labels
            .iter()
            .enumerate()
            .map(|(k, &(t, l))| comment(&format!("c{k:04}"), "v", &format!("u{k}"), t, l))
            .collect();
        Corpus::new(vec![channel("ch", Category::Reliable)], vec![video("v", "ch", 0)], comments).unwrap()
    }

    #[test]
    fn toxicity_arithmetic() {
        let c = thread(&[(1, Some(Appropriate)), (2, Some(Inappropriate)), (3, Some(Offensive)), (4, Some(Violent))]);
        assert_eq!(discussion_toxicity(&c, &discussions(&c)[0]).unwrap(), 1.5);
        let c = thread(&[(1, Some(Appropriate)); 3]);
        assert_eq!(discussion_toxicity(&c, &discussions(&c)[0]).unwrap(), 0.0);
        let c = thread(&[(1, Some(Violent)); 3]);
        assert_eq!(discussion_toxicity(&c, &discussions(&c)[0]).unwrap(), 3.0);
        let c = thread(&[(1, Some(Violent)), (2, None)]);
        assert_eq!(
            discussion_toxicity(&c, &discussions(&c)[0]),
            Err(AnalysisError::UnlabeledComment("c0001".into()))
        );
    }

    #[test]
    fn chronological_order_with_id_ties() {
        let c = thread(&[(50, None), (10, None), (50, None), (20, None)]);
        let d = &discussions(&c)[0];
        assert_eq!(d.comments, vec![1, 3, 0, 2]);
        assert_eq!(comment_positions(&c), vec![3, 1, 4, 2]);
    }

    #[test]
    fn shuffle_preserves_multiset_and_depends_on_seed() {
        let items: Vec<(i64, Option<HateLabel>)> = (0..200).map(|k| (k, Some(HateLabel::ALL[(k % 7).min(3) as usize]))).collect();
        let c = thread(&items);
        let a = shuffle_labels(&c, 1).unwrap();
        let b = shuffle_labels(&c, 2).unwrap();
        let count = |c: &Corpus| {
            let mut n = [0; 4];
            c.labels().iter().for_each(|l| n[l.unwrap().index()] += 1);
            n
        };
        assert_eq!(count(&a), count(&c));
        assert_eq!(count(&b), count(&c));
        assert_ne!(a.labels(), b.labels());
        assert_eq!(a.labels(), shuffle_labels(&c, 1).unwrap().labels());
        assert!(shuffle_labels(&thread(&[(1, None)]), 1).is_err());
    }

    proptest! {
        #[test]
        fn toxicity_ignores_order(labels in prop::collection::vec(0u8..4, 1..30), rotate in 0usize..30) {
            let to_label = |k: u8| HateLabel::from_toxicity(k).unwrap();
            let a: Vec<_> = labels.iter().enumerate().map(|(t, &k)| (t as i64, Some(to_label(k)))).collect();
            let mut b = a.clone();
            b.rotate_left(rotate % a.len());
            for (t, item) in b.iter_mut().enumerate() {
                item.0 = t as i64;
            }
            let ca = thread(&a);
            let cb = thread(&b);
            let ta = discussion_toxicity(&ca, &discussions(&ca)[0]).unwrap();
            let tb = discussion_toxicity(&cb, &discussions(&cb)[0]).unwrap();
            prop_assert_eq!(ta, tb);
            prop_assert!((0.0..=3.0).contains(&ta));
        }
    }
}
