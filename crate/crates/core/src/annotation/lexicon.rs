//! Lexicon-based basic hate speech scorer used to pick annotation threads.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::AnnotationError;
use crate::corpus::Corpus;

/// Score in `[-3, +3]`: −3 hateful … +3 normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasicScore(i8);

impl BasicScore {
    pub const MIN: i8 = -3;
    pub const MAX: i8 = 3;

    pub fn new(raw: i64) -> Self {
        BasicScore(raw.clamp(Self::MIN as i64, Self::MAX as i64) as i8)
    }

    pub fn value(self) -> i8 {
        self.0
    }

    /// Hateful means a negative score.
    pub fn is_hateful(self) -> bool {
        self.0 < 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub term: String,
    pub penalty: u8,
    tokens: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    by_first_token: HashMap<String, Vec<usize>>,
}

/// Lower-cased alphanumeric runs.
pub(crate) fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

impl Lexicon {
    /// Builds a lexicon; penalties must be 1, 2 or 3 and terms non-blank.
    pub fn new(entries: impl IntoIterator<Item = (String, u8)>) -> Result<Self, String> {
        let mut lex = Lexicon::default();
        for (term, penalty) in entries {
            if !(1..=3).contains(&penalty) {
                return Err(format!("penalty for '{term}' must be 1, 2 or 3, got {penalty}"));
            }
            let tokens: Vec<String> = tokenize(&term).collect();
            if tokens.is_empty() {
                return Err(format!("term '{term}' has no word characters"));
            }
            lex.by_first_token
                .entry(tokens[0].clone())
                .or_default()
                .push(lex.entries.len());
            lex.entries.push(LexiconEntry { term, penalty, tokens });
        }
        Ok(lex)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Penalties of every whole-word hit, one per occurrence.
    pub fn hits(&self, text: &str) -> Vec<u8> {
        let tokens: Vec<String> = tokenize(text).collect();
        let mut out = Vec::new();
        for (i, tok) in tokens.iter().enumerate() {
            if let Some(cands) = self.by_first_token.get(tok) {
                for &e in cands {
                    let entry = &self.entries[e];
                    if tokens[i..].starts_with(&entry.tokens) {
                        out.push(entry.penalty);
                    }
                }
            }
        }
        out
    }
}

#[derive(Deserialize)]
struct Row {
    term: String,
    penalty: String,
}

/// Reads `lexicon.csv` with header `term,penalty`.
pub fn parse_lexicon<R: Read>(reader: R, file: &str) -> Result<Lexicon, AnnotationError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let line = rows.len() as u64 + 2;
        let perr = |reason: String| AnnotationError::Parse {
            file: file.into(),
            line,
            reason,
        };
        let row = row.map_err(|e| perr(e.to_string()))?;
        let penalty: u8 = row
            .penalty
            .parse()
            .map_err(|_| perr(format!("penalty '{}' is not an integer", row.penalty)))?;
        Lexicon::new([(row.term.clone(), penalty)]).map_err(perr)?;
        rows.push((row.term, penalty));
    }
    let lex = Lexicon::new(rows).expect("rows validated");
    if lex.is_empty() {
        log::warn!("{file}: empty lexicon, every comment will score +3");
    }
    Ok(lex)
}

impl Lexicon {
    pub fn parse<R: Read>(reader: R, file: &str) -> Result<Self, AnnotationError> {
        parse_lexicon(reader, file)
    }
}

/// `clamp(3 − Σ penalties, −3, 3)` with case-insensitive whole-word matching.
pub fn basic_score(comment_text: &str, lexicon: &Lexicon) -> BasicScore {
    let total: i64 = lexicon.hits(comment_text).iter().map(|&p| p as i64).sum();
    BasicScore::new(3 - total)
}

/// Scores every comment in corpus order; comments without text score +3.
pub fn score_comments(corpus: &Corpus, lexicon: &Lexicon) -> Vec<BasicScore> {
    if lexicon.is_empty() {
        log::warn!("empty lexicon, every comment scores +3");
    }
    corpus
        .comments()
        .iter()
        .map(|c| basic_score(c.text.as_deref().unwrap_or(""), lexicon))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(entries: &[(&str, u8)]) -> Lexicon {
        Lexicon::new(entries.iter().map(|(t, p)| (t.to_string(), *p))).unwrap()
    }

    #[test]
    fn no_hits_scores_plus_three() {
        let l = lex(&[("idiota", 2)]);
        assert_eq!(basic_score("buongiorno a tutti", &l).value(), 3);
        assert_eq!(basic_score("anything", &Lexicon::default()).value(), 3);
    }

    #[test]
    fn penalties_sum_and_clamp() {
        let l = lex(&[("idiota", 2), ("schifo", 2), ("ammazzare", 3)]);
        assert_eq!(basic_score("Idiota! che schifo, da ammazzare", &l).value(), -3);
        let l = lex(&[("bah", 1)]);
        assert_eq!(basic_score("bah.", &l).value(), 2);
    }

    #[test]
    fn whole_word_and_phrases() {
        let l = lex(&[("ratto", 1), ("corona virus", 2)]);
        assert_eq!(basic_score("carattone", &l).value(), 3);
        assert_eq!(basic_score("CORONA   virus!", &l).value(), 1);
        assert_eq!(basic_score("corona-virus", &l).value(), 1);
        assert_eq!(basic_score("ratto ratto", &l).value(), 1);
    }

    #[test]
    fn rejects_bad_penalty() {
        assert!(parse_lexicon("term,penalty\nx,4\n".as_bytes(), "l").is_err());
        assert!(parse_lexicon("term,penalty\nx,abc\n".as_bytes(), "l").is_err());
        let l = parse_lexicon("term,penalty\nfoo,3\n".as_bytes(), "l").unwrap();
        assert_eq!(l.entries().len(), 1);
    }

    #[test]
    fn score_is_always_bounded() {
        let l = lex(&[("a", 3), ("b", 1)]);
        for text in ["", "a a a a a", "b", "x y z"] {
            let s = basic_score(text, &l).value();
            assert!((-3..=3).contains(&s));
        }
    }
}
