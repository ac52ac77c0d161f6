//! Annotation campaign planning and evaluation.

mod agreement;
mod assign;
mod cv;
mod labeler;
mod lexicon;
mod metrics;
mod records;
mod selection;

pub use agreement::{agreement_report, krippendorff_alpha, alpha_from_units, AgreementReport, DistanceMetric};
pub use assign::{assign_annotators, threads_of, Assignment, Thread};
pub use cv::{annotator_fold_cv, cv_folds, CvReport, Fold, FoldReport, PooledMetrics};
pub use labeler::{
    ConstantLabeler, Fixed, LabelInput, Labeler, LabelerIdentity, LexiconLabeler, MajorityClassTrainer,
    TextIndex, Trainer,
};
pub use lexicon::{basic_score, parse_lexicon, score_comments, BasicScore, Lexicon, LexiconEntry};
pub use metrics::{per_class_f1, percent_agreement, ClassScore};
pub use records::{parse_annotations, write_annotations, AnnotationRecord};
pub use selection::{sample_evaluation_threads, select_training_threads, SelectionCriteria, ThreadSet};

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("{file}:{line}: {reason}")]
    Parse { file: String, line: u64, reason: String },
    #[error("duplicate annotation of comment '{comment_id}' by '{annotator_id}'")]
    DuplicateRecord { comment_id: String, annotator_id: String },
    #[error("alpha is undefined: no unit carries two or more annotations")]
    UndefinedAlpha,
    #[error("unit '{unit}' has {count} annotation records, expected exactly 2")]
    UnitSize { unit: String, count: usize },
    #[error("no prediction for comment '{0}'")]
    MissingPrediction(String),
    #[error("need at least 2 annotators and at least `redundancy` of them (k={k}, redundancy={redundancy})")]
    TooFewAnnotators { k: usize, redundancy: usize },
    #[error("{0} scores supplied for {1} comments")]
    ScoreCount(usize, usize),
}
