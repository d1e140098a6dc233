//! Curated knowledge tables.
//!
//! One row per line: `category<TAB>key<TAB>value[<TAB>extra]`. Blank lines
//! and `#` comments are skipped. What key and value mean depends on the
//! category; see the header of `data/knowledge.txt`.

use std::collections::BTreeMap;
use std::path::Path;

use super::KnowledgeError;

pub const BUILTIN_KNOWLEDGE: &str = include_str!("../../data/knowledge.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub key: String,
    pub value: String,
    pub extra: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeTables {
    rows: BTreeMap<String, Vec<Row>>,
}

impl KnowledgeTables {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_KNOWLEDGE).expect("bundled knowledge tables parse")
    }

    pub fn load(path: &Path) -> Result<Self, KnowledgeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KnowledgeError::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, KnowledgeError> {
        let mut rows: BTreeMap<String, Vec<Row>> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if !(3..=4).contains(&cols.len()) || cols[..3].iter().any(|c| c.is_empty()) {
                return Err(KnowledgeError::Table(format!(
                    "line {}: expected category, key, value and an optional extra column",
                    n + 1
                )));
            }
            rows.entry(cols[0].to_string()).or_default().push(Row {
                key: cols[1].to_string(),
                value: cols[2].to_string(),
                extra: cols.get(3).map(|s| s.to_string()),
            });
        }
        Ok(Self { rows })
    }

    pub fn rows(&self, category: &str) -> &[Row] {
        self.rows.get(category).map(Vec::as_slice).unwrap_or(&[])
    }

    /// (key, value) pairs, failing when the category has none.
    pub fn pairs(&self, category: &str) -> Result<Vec<(String, String)>, KnowledgeError> {
        let rows = self.rows(category);
        if rows.is_empty() {
            return Err(KnowledgeError::Table(format!("no rows for {category:?}")));
        }
        Ok(rows.iter().map(|r| (r.key.clone(), r.value.clone())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_contains_worked_examples() {
        let t = KnowledgeTables::builtin();
        let has = |c: &str, k: &str, v: &str| t.rows(c).iter().any(|r| r.key == k && r.value == v);
        assert!(has("places", "Montreal", "Canada"));
        assert!(has("jobs", "nurse", "healthcare"));
        assert!(has("jobs", "high school teacher", "education"));
        assert!(has("jobs", "sales manager", "marketing"));
        assert!(has("affordance", "a knife", "a sharp object"));
        assert!(has("affordance", "a cappuccino", "something to drink"));
        assert!(has("affordance", "a flute", "a musical instrument"));
        assert!(has("textual_entailment", "assassinated the mayor", "killed the mayor"));
        assert!(has("events", "Covid19 started", "2019"));
        assert!(has("events", "world war 1 started", "1914"));
        assert!(has("names", "name", "Paco"));
    }

    #[test]
    fn malformed_row_rejected() {
        assert!(KnowledgeTables::parse("places\tMontreal\n").is_err());
        assert!(KnowledgeTables::parse("# only a comment\n\n").unwrap().rows("places").is_empty());
    }
}
