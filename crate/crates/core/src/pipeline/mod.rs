//! Dataset construction: configured splits of label-balanced examples.

mod config;
mod jsonl;
mod stats;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::generator::{generate_example, Example, GenParams, Resources, ShapeRegistry};
use crate::knowledge::{KnowledgeRegistry, KnowledgeTables};
use crate::render::TemplateSet;
use crate::rng::derive_seed;
use crate::solver::{entail, verify_proof};
use crate::vocab::{Split, Vocab};

pub use config::{ConfigError, DatasetConfig, LabelSet, Sizes};
pub use jsonl::{emit_jsonl, from_line, read_jsonl, to_line};
pub use stats::{dataset_stats, SplitStats};

/// Generation attempts per example index before giving up.
pub const RETRY_BUDGET: u64 = 64;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading {what}: {reason}")]
    Resource { what: &'static str, reason: String },
    #[error("{split} example {index}: no success after {attempts} attempts ({last})")]
    Generation {
        split: Split,
        index: usize,
        attempts: u64,
        last: String,
    },
    #[error("{id}: {reason}")]
    Verification { id: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },
}

impl Resources {
    /// Bundled resources with any data files named in `cfg` swapped in.
    pub fn from_config(cfg: &DatasetConfig) -> Result<Self, PipelineError> {
        let vocab = match &cfg.vocab {
            Some(p) => Vocab::load(p).map_err(|e| resource("vocabulary", e))?,
            None => Vocab::builtin(),
        };
        let templates = match &cfg.templates {
            Some(p) => TemplateSet::load(p).map_err(|e| resource("templates", e))?,
            None => TemplateSet::builtin(),
        };
        let knowledge = match &cfg.knowledge {
            Some(p) => KnowledgeTables::load(p)
                .and_then(|t| KnowledgeRegistry::with_tables(&t))
                .map_err(|e| resource("knowledge tables", e))?,
            None => KnowledgeRegistry::builtin(),
        };
        Ok(Self {
            vocab,
            templates,
            knowledge,
            shapes: ShapeRegistry::builtin(),
        })
    }
}

fn resource(what: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Resource {
        what,
        reason: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub split: Split,
    pub examples: Vec<Example>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub splits: Vec<SplitData>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> Option<&[Example]> {
        self.splits
            .iter()
            .find(|s| s.split == split)
            .map(|s| s.examples.as_slice())
    }
}

pub fn example_id(name: &str, split: Split, index: usize) -> String {
    format!("{name}-{split}-{index:05}")
}

pub fn example_seed(master: u64, split: Split, index: usize) -> u64 {
    derive_seed(master, split.as_str(), index as u64)
}

/// Generates example `index` of `split`, retrying with derived seeds.
pub fn generate_indexed(
    cfg: &DatasetConfig,
    res: &Resources,
    split: Split,
    index: usize,
) -> Result<Example, PipelineError> {
    let params = GenParams {
        vocab_split: split,
        ..cfg.gen.clone()
    };
    let labels = cfg.labels.labels();
    let target = labels[index % labels.len()];
    let seed = example_seed(cfg.seed, split, index);
    let mut last = String::new();
    for attempt in 0..RETRY_BUDGET {
        let s = if attempt == 0 {
            seed
        } else {
            derive_seed(seed, "retry", attempt)
        };
        match generate_example(&params, target, s, res) {
            Ok(mut e) => {
                e.id = example_id(&cfg.name, split, index);
                return Ok(e);
            }
            Err(e) if e.is_retryable() => last = e.to_string(),
            Err(e) => {
                return Err(PipelineError::Generation {
                    split,
                    index,
                    attempts: attempt + 1,
                    last: e.to_string(),
                })
            }
        }
    }
    Err(PipelineError::Generation {
        split,
        index,
        attempts: RETRY_BUDGET,
        last,
    })
}

/// Re-solves an example and replays its proof.
pub fn verify_example(e: &Example, res: &Resources) -> Result<(), PipelineError> {
    let fail = |reason: String| PipelineError::Verification {
        id: e.id.clone(),
        reason,
    };
    let r = entail(&e.theory, &e.question, &res.knowledge).map_err(|x| fail(x.to_string()))?;
    if r.label != e.label {
        return Err(fail(format!("stored label {} but solver says {}", e.label, r.label)));
    }
    match &e.proof {
        Some(p) => verify_proof(&e.theory, &e.question, e.label, p, &res.knowledge).map_err(|x| fail(x.to_string())),
        None if e.label == crate::theory::Label::Unknown => Ok(()),
        None => Err(fail("decided example without a proof".into())),
    }
}

/// All three splits, generated in parallel and ordered by index, then re-verified.
pub fn build_dataset(cfg: &DatasetConfig, res: &Resources) -> Result<Dataset, PipelineError> {
    cfg.gen.validate().map_err(|e| ConfigError::BadValue {
        key: "gen".into(),
        reason: e.to_string(),
    })?;
    let mut splits = Vec::new();
    for split in Split::ALL {
        let examples: Vec<Example> = (0..cfg.sizes.get(split))
            .into_par_iter()
            .map(|i| generate_indexed(cfg, res, split, i))
            .collect::<Result<_, _>>()?;
        examples.par_iter().try_for_each(|e| verify_example(e, res))?;
        splits.push(SplitData { split, examples });
    }
    Ok(Dataset {
        name: cfg.name.clone(),
        splits,
    })
}

/// Writes `<dir>/<split>.jsonl` for every split and returns the paths.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for s in &ds.splits {
        let path = dir.join(format!("{}.jsonl", s.split));
        emit_jsonl(&s.examples, &path)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::Label;

    fn small(name: &str) -> DatasetConfig {
        let mut cfg = DatasetConfig::new(name);
        cfg.sizes = Sizes {
            train: 12,
            validation: 6,
            test: 12,
        };
        cfg.seed = 42;
        cfg
    }

    #[test]
    fn builds_balanced_verified_splits() {
        let cfg = small("unit");
        let res = Resources::from_config(&cfg).unwrap();
        let ds = build_dataset(&cfg, &res).unwrap();
        let train = ds.split(Split::Train).unwrap();
        assert_eq!(train.len(), 12);
        assert_eq!(train[3].id, "unit-train-00003");
        let st = dataset_stats(train);
        assert_eq!(st.labels.values().copied().collect::<Vec<_>>(), vec![4, 4, 4]);
        assert_eq!(st.proof_depths.values().sum::<usize>(), 12);
        assert_eq!(ds.split(Split::Validation).unwrap().len(), 6);
    }

    #[test]
    fn binary_labels_only() {
        let mut cfg = small("bin");
        cfg.labels = LabelSet::Binary;
        cfg.gen.force_conflict_at_root = true;
        let res = Resources::from_config(&cfg).unwrap();
        let ds = build_dataset(&cfg, &res).unwrap();
        for s in &ds.splits {
            for e in &s.examples {
                assert_ne!(e.label, Label::Unknown);
                assert!(e.metadata.conflicts_type1 + e.metadata.conflicts_type2 >= 1);
            }
        }
    }

    #[test]
    fn jsonl_lines_round_trip() {
        let cfg = small("rt");
        let res = Resources::from_config(&cfg).unwrap();
        for i in 0..6 {
            let e = generate_indexed(&cfg, &res, Split::Test, i).unwrap();
            let line = to_line(&e);
            assert_eq!(from_line(&line).unwrap(), e);
            let keys: Vec<&str> = ["\"id\"", "\"text\"", "\"question\"", "\"label\"", "\"proof_text\"", "\"theory\"", "\"proof\"", "\"metadata\""]
                .into_iter()
                .collect();
            let pos: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
            assert!(pos.windows(2).all(|w| w[0] < w[1]), "{line}");
            if e.label == Label::Unknown {
                assert!(line.contains("\"proof\":null"));
            }
        }
    }

    #[test]
    fn tampered_label_fails_verification() {
        let cfg = small("v");
        let res = Resources::from_config(&cfg).unwrap();
        let mut e = generate_indexed(&cfg, &res, Split::Train, 0).unwrap();
        verify_example(&e, &res).unwrap();
        e.label = Label::Disproved;
        assert!(matches!(verify_example(&e, &res), Err(PipelineError::Verification { .. })));
    }
}
