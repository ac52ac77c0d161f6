//! The labeler port and the deterministic baselines that fill it.

use std::collections::HashMap;

use serde::Serialize;

use super::{AnnotationRecord, Lexicon};
use crate::label::HateLabel;

/// Comment id → comment text.
pub type TextIndex = HashMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelerIdentity {
    pub name: String,
    pub version: String,
}

impl LabelerIdentity {
    pub fn new(name: impl Into<String>, version: impl Into<String>) -> Self {
        LabelerIdentity {
            name: name.into(),
            version: version.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LabelInput<'a> {
    pub comment_id: &'a str,
    pub text: Option<&'a str>,
}

/// A total, deterministic map from a comment to a label.
pub trait Labeler: Send + Sync {
    fn identity(&self) -> LabelerIdentity;

    fn label(&self, input: &LabelInput<'_>) -> HateLabel;

    /// `false` forces callers to invoke [`Labeler::label`] from one thread.
    fn concurrent(&self) -> bool {
        true
    }
}

/// Produces a labeler from a training pool; one call per cross-validation fold.
pub trait Trainer: Sync {
    type Model: Labeler;

    fn identity(&self) -> LabelerIdentity;

    fn train(&self, training: &[&AnnotationRecord], texts: &TextIndex) -> Self::Model;

    fn concurrent(&self) -> bool {
        true
    }
}

/// Wraps a labeler that ignores its training pool.
#[derive(Debug, Clone)]
pub struct Fixed<L>(pub L);

impl<L: Labeler + Clone> Trainer for Fixed<L> {
    type Model = L;

    fn identity(&self) -> LabelerIdentity {
        self.0.identity()
    }

    fn train(&self, _training: &[&AnnotationRecord], _texts: &TextIndex) -> L {
        self.0.clone()
    }

    fn concurrent(&self) -> bool {
        self.0.concurrent()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantLabeler(pub HateLabel);

impl Labeler for ConstantLabeler {
    fn identity(&self) -> LabelerIdentity {
        LabelerIdentity::new(format!("constant-{}", self.0.code()), "1")
    }

    fn label(&self, _input: &LabelInput<'_>) -> HateLabel {
        self.0
    }
}

/// Most severe lexicon hit decides: none → A, penalty 1 → I, 2 → O, 3 → V.
#[derive(Debug, Clone)]
pub struct LexiconLabeler {
    lexicon: Lexicon,
}

impl LexiconLabeler {
    pub fn new(lexicon: Lexicon) -> Self {
        LexiconLabeler { lexicon }
    }
}

impl Labeler for LexiconLabeler {
    fn identity(&self) -> LabelerIdentity {
        LabelerIdentity::new("lexicon", format!("1+{}terms", self.lexicon.entries().len()))
    }

    fn label(&self, input: &LabelInput<'_>) -> HateLabel {
        let worst = input
            .text
            .map(|t| self.lexicon.hits(t).into_iter().max().unwrap_or(0))
            .unwrap_or(0);
        HateLabel::from_toxicity(worst).unwrap_or(HateLabel::Violent)
    }
}

/// Predicts the most frequent label of its training pool (ties → less severe).
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityClassTrainer;

impl Trainer for MajorityClassTrainer {
    type Model = ConstantLabeler;

    fn identity(&self) -> LabelerIdentity {
        LabelerIdentity::new("majority-class", "1")
    }

    fn train(&self, training: &[&AnnotationRecord], _texts: &TextIndex) -> ConstantLabeler {
        let mut counts = [0usize; 4];
        for r in training {
            counts[r.label.index()] += 1;
        }
        let best = (0..4).fold(0, |best, i| if counts[i] > counts[best] { i } else { best });
        ConstantLabeler(HateLabel::ALL[best])
    }
}
