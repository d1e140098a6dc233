use std::collections::BTreeMap;

use serde::Serialize;

use crate::generator::Example;
use crate::solver::ConflictKind;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SplitStats {
    pub size: usize,
    pub labels: BTreeMap<String, usize>,
    /// Examples by gold proof depth; unknown examples count as depth 0.
    pub proof_depths: BTreeMap<usize, usize>,
    pub mean_proof_depth: f64,
    pub max_proof_depth: usize,
    /// Conflict resolutions appearing in gold proofs.
    pub proof_conflicts_type1: usize,
    pub proof_conflicts_type2: usize,
    /// Conflicts injected during generation.
    pub injected_type1: usize,
    pub injected_type2: usize,
    pub generation_steps: usize,
    pub examples_with_conflict: usize,
    /// Examples mentioning each knowledge category.
    pub knowledge_categories: BTreeMap<String, usize>,
    pub examples_without_knowledge: usize,
    pub distractors: usize,
    /// Mean problem length in characters.
    pub mean_text_length: f64,
}

impl SplitStats {
    /// Injected conflicts per generation step.
    pub fn conflict_rate(&self) -> f64 {
        ratio(self.injected_type1 + self.injected_type2, self.generation_steps)
    }

    /// Share of Type1 among gold-proof conflict resolutions.
    pub fn proof_type1_share(&self) -> f64 {
        ratio(self.proof_conflicts_type1, self.proof_conflicts_type1 + self.proof_conflicts_type2)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn dataset_stats(examples: &[Example]) -> SplitStats {
    let mut s = SplitStats {
        size: examples.len(),
        ..SplitStats::default()
    };
    let mut depth_sum = 0;
    let mut chars = 0;
    for e in examples {
        *s.labels.entry(e.label.as_str().to_string()).or_default() += 1;
        let depth = e.proof.as_ref().map_or(0, |p| p.depth());
        *s.proof_depths.entry(depth).or_default() += 1;
        depth_sum += depth;
        s.max_proof_depth = s.max_proof_depth.max(depth);
        if let Some(p) = &e.proof {
            for c in &p.conflicts {
                match c.kind {
                    ConflictKind::Type1 => s.proof_conflicts_type1 += 1,
                    ConflictKind::Type2 => s.proof_conflicts_type2 += 1,
                }
            }
        }
        let m = &e.metadata;
        s.injected_type1 += m.conflicts_type1;
        s.injected_type2 += m.conflicts_type2;
        s.generation_steps += m.steps;
        if m.conflicts_type1 + m.conflicts_type2 > 0 {
            s.examples_with_conflict += 1;
        }
        if m.knowledge_categories.is_empty() {
            s.examples_without_knowledge += 1;
        }
        for c in &m.knowledge_categories {
            *s.knowledge_categories.entry(c.clone()).or_default() += 1;
        }
        s.distractors += m.distractors;
        chars += e.text.chars().count();
    }
    if !examples.is_empty() {
        s.mean_proof_depth = depth_sum as f64 / examples.len() as f64;
        s.mean_text_length = chars as f64 / examples.len() as f64;
    }
    s
}
