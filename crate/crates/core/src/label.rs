use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Four-level hate speech schema, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HateLabel {
    #[serde(rename = "A")]
    Appropriate,
    #[serde(rename = "I")]
    Inappropriate,
    #[serde(rename = "O")]
    Offensive,
    #[serde(rename = "V")]
    Violent,
}

impl HateLabel {
    pub const ALL: [HateLabel; 4] = [
        HateLabel::Appropriate,
        HateLabel::Inappropriate,
        HateLabel::Offensive,
        HateLabel::Violent,
    ];

    /// Toxicity value `t`: A→0, I→1, O→2, V→3.
    pub const fn toxicity(self) -> u8 {
        self as u8
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_toxicity(t: u8) -> Option<Self> {
        Self::ALL.get(t as usize).copied()
    }

    pub const fn code(self) -> &'static str {
        match self {
            HateLabel::Appropriate => "A",
            HateLabel::Inappropriate => "I",
            HateLabel::Offensive => "O",
            HateLabel::Violent => "V",
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            HateLabel::Appropriate => "appropriate",
            HateLabel::Inappropriate => "inappropriate",
            HateLabel::Offensive => "offensive",
            HateLabel::Violent => "violent",
        }
    }
}

impl fmt::Display for HateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid label token '{0}' (expected one of A, I, O, V)")]
pub struct InvalidLabel(pub String);

impl FromStr for HateLabel {
    type Err = InvalidLabel;

    /// Accepts the single-letter codes, case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(HateLabel::Appropriate),
            "I" | "i" => Ok(HateLabel::Inappropriate),
            "O" | "o" => Ok(HateLabel::Offensive),
            "V" | "v" => Ok(HateLabel::Violent),
            other => Err(InvalidLabel(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toxicity_values_are_a_bijection() {
        for (t, label) in HateLabel::ALL.iter().enumerate() {
            assert_eq!(label.toxicity() as usize, t);
            assert_eq!(HateLabel::from_toxicity(t as u8), Some(*label));
        }
        assert_eq!(HateLabel::from_toxicity(4), None);
    }

    #[test]
    fn parses_codes() {
        assert_eq!("v".parse::<HateLabel>().unwrap(), HateLabel::Violent);
        assert_eq!(" O ".parse::<HateLabel>().unwrap(), HateLabel::Offensive);
        let err = "X".parse::<HateLabel>().unwrap_err();
        assert_eq!(err.0, "X");
    }

    #[test]
    fn serde_uses_codes() {
        let s = serde_json::to_string(&HateLabel::Inappropriate).unwrap();
        assert_eq!(s, "\"I\"");
    }
}
