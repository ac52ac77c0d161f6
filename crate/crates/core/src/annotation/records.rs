use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::AnnotationError;
use crate::label::HateLabel;

/// One annotator's label for one comment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub comment_id: String,
    pub annotator_id: String,
    pub label: HateLabel,
}

impl AnnotationRecord {
    pub fn new(comment_id: impl Into<String>, annotator_id: impl Into<String>, label: HateLabel) -> Self {
        AnnotationRecord {
            comment_id: comment_id.into(),
            annotator_id: annotator_id.into(),
            label,
        }
    }
}

#[derive(Deserialize)]
struct Row {
    comment_id: String,
    annotator_id: String,
    label: String,
}

/// Reads `annotations.csv` (`comment_id,annotator_id,label`), rejecting
/// repeated (comment, annotator) pairs.
pub fn parse_annotations<R: Read>(reader: R, file: &str) -> Result<Vec<AnnotationRecord>, AnnotationError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in rdr.deserialize::<Row>() {
        let line = out.len() as u64 + 2;
        let row = row.map_err(|e| AnnotationError::Parse {
            file: file.into(),
            line: e.position().map_or(line, |p| p.line()),
            reason: e.to_string(),
        })?;
        if row.comment_id.is_empty() || row.annotator_id.is_empty() {
            return Err(AnnotationError::Parse {
                file: file.into(),
                line,
                reason: "empty comment_id or annotator_id".into(),
            });
        }
        let label = row.label.parse::<HateLabel>().map_err(|e| AnnotationError::Parse {
            file: file.into(),
            line,
            reason: e.to_string(),
        })?;
        if !seen.insert((row.comment_id.clone(), row.annotator_id.clone())) {
            return Err(AnnotationError::DuplicateRecord {
                comment_id: row.comment_id,
                annotator_id: row.annotator_id,
            });
        }
        out.push(AnnotationRecord {
            comment_id: row.comment_id,
            annotator_id: row.annotator_id,
            label,
        });
    }
    Ok(out)
}

pub fn write_annotations<W: Write>(records: &[AnnotationRecord], w: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["comment_id", "annotator_id", "label"])?;
    for r in records {
        wtr.write_record([r.comment_id.as_str(), r.annotator_id.as_str(), r.label.code()])?;
    }
    wtr.flush()
}
