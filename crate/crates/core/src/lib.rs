//! Measurement pipeline for toxicity in online comment threads.
//!
//! The crate is organised by stage:
//!
//! * [`corpus`] – channel/video/comment model, streaming ingestion and the
//!   category breakdown table.
//! * [`collector`] – paginated acquisition client with retries, rate limiting,
//!   resumable comment download and a replayable fixture source.
//! * [`annotation`] – campaign planning (lexicon scorer, thread selection,
//!   annotator assignment) and evaluation (Krippendorff's alpha, agreement,
//!   per-class F1, annotator-fold cross validation).
//! * [`behavior`] – comment delays, label time series, channel concentration
//!   and per-user label geometry.
//! * [`toxicity`] – discussion toxicity, binned regressions, shuffled-label
//!   nulls and the synthetic corpus generator.

pub mod annotation;
pub mod behavior;
pub mod collector;
pub mod corpus;
pub mod error;
pub mod label;
pub mod seed;
pub mod stats;
pub mod toxicity;

pub use corpus::{Category, Channel, Comment, Corpus, CorpusError, Video};
pub use error::AnalysisError;
pub use label::HateLabel;
