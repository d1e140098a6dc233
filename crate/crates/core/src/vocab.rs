//! Entity and predicate vocabularies, partitioned by split.
//!
//! The data file has one `kind<TAB>split<TAB>value` entry per line, where
//! `kind` is `entity` or `predicate` and `split` is `train` or `test`.
//! Blank lines and lines starting with `#` are ignored. Validation examples
//! draw from the train side.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BUILTIN_VOCAB: &str = include_str!("../data/vocab.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn side(self) -> Side {
        match self {
            Split::Train | Split::Validation => Side::Train,
            Split::Test => Side::Test,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// Which half of a partitioned resource a split may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Train,
    Test,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Train => Side::Test,
            Side::Test => Side::Train,
        }
    }
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Side::Train),
            "test" => Ok(Side::Test),
            other => Err(format!("unknown side {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{value:?} is listed for both train and test")]
    Overlap { value: String },
    #[error("{0} list is empty")]
    Empty(&'static str),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    pub train_entities: Vec<String>,
    pub test_entities: Vec<String>,
    pub train_predicates: Vec<String>,
    pub test_predicates: Vec<String>,
}

impl Vocab {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_VOCAB).expect("bundled vocabulary parses")
    }

    pub fn load(path: &Path) -> Result<Self, VocabError> {
        let text = std::fs::read_to_string(path).map_err(|source| VocabError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, VocabError> {
        let mut v = Vocab::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| VocabError::Parse { line: n + 1, reason };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [kind, side, value] = cols[..] else {
                return Err(err(format!("expected 3 tab-separated columns, got {}", cols.len())));
            };
            let side: Side = side.parse().map_err(err)?;
            let list = match (kind, side) {
                ("entity", Side::Train) => &mut v.train_entities,
                ("entity", Side::Test) => &mut v.test_entities,
                ("predicate", Side::Train) => &mut v.train_predicates,
                ("predicate", Side::Test) => &mut v.test_predicates,
                _ => return Err(err(format!("unknown kind {kind:?}"))),
            };
            if value.is_empty() {
                return Err(err("empty value".into()));
            }
            list.push(value.to_string());
        }
        for (a, b) in [
            (&v.train_entities, &v.test_entities),
            (&v.train_predicates, &v.test_predicates),
        ] {
            if let Some(value) = a.iter().find(|x| b.contains(x)) {
                return Err(VocabError::Overlap {
                    value: value.clone(),
                });
            }
        }
        for (list, name) in [
            (&v.train_entities, "train entity"),
            (&v.test_entities, "test entity"),
            (&v.train_predicates, "train predicate"),
            (&v.test_predicates, "test predicate"),
        ] {
            if list.is_empty() {
                return Err(VocabError::Empty(name));
            }
        }
        Ok(v)
    }

    pub fn entities(&self, side: Side) -> &[String] {
        match side {
            Side::Train => &self.train_entities,
            Side::Test => &self.test_entities,
        }
    }

    pub fn predicates(&self, side: Side) -> &[String] {
        match side {
            Side::Train => &self.train_predicates,
            Side::Test => &self.test_predicates,
        }
    }
}
