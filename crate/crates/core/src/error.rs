use crate::corpus::Category;

/// Failures of the analytics over a loaded corpus.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("{operation} requires labels, but {unlabeled} comments are unlabeled")]
    RequiresLabels { operation: &'static str, unlabeled: usize },
    #[error("comment '{0}' is unlabeled")]
    UnlabeledComment(String),
    #[error("no observations for {0}")]
    EmptyGroup(String),
    #[error("no comments in the {0} category")]
    EmptyCategory(Category),
    #[error("regression needs at least 3 bins, got {0}")]
    TooFewBins(usize),
    #[error("regressor has zero variance")]
    ZeroVarianceX,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn require_labels(corpus: &crate::Corpus, operation: &'static str) -> Result<(), AnalysisError> {
    let unlabeled = corpus.comments().len() - corpus.labeled_count();
    if unlabeled > 0 {
        Err(AnalysisError::RequiresLabels { operation, unlabeled })
    } else {
        Ok(())
    }
}
