use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{GroundBody, GroundRuleSet, SolverError};
use crate::theory::Atom;

/// Ground atoms layered so every rule's body atoms sit strictly below its head.
#[derive(Debug, Clone, Default)]
pub struct Strata {
    pub layers: Vec<Vec<Atom>>,
    level: HashMap<Atom, usize>,
}

impl Strata {
    pub fn level(&self, atom: &Atom) -> Option<usize> {
        self.level.get(atom).copied()
    }
}

/// Layer index of an atom is the length of the longest dependency path
/// reaching it. Signs are ignored; decided foreign literals add no edges.
pub fn stratify(g: &GroundRuleSet) -> Result<Strata, SolverError> {
    let mut nodes: BTreeSet<&Atom> = g.facts.iter().map(|l| &l.atom).collect();
    let mut succ: BTreeMap<&Atom, BTreeSet<&Atom>> = BTreeMap::new();
    for rule in &g.rules {
        nodes.insert(&rule.head.atom);
        for b in &rule.body {
            if let GroundBody::Literal(l) = b {
                nodes.insert(&l.atom);
                succ.entry(&l.atom).or_default().insert(&rule.head.atom);
            }
        }
    }

    let mut indegree: BTreeMap<&Atom, usize> = nodes.iter().map(|a| (*a, 0)).collect();
    for targets in succ.values() {
        for t in targets {
            *indegree.get_mut(t).expect("node registered") += 1;
        }
    }

    let mut level: HashMap<Atom, usize> = HashMap::new();
    let mut depth: BTreeMap<&Atom, usize> = BTreeMap::new();
    let mut frontier: Vec<&Atom> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(a, _)| *a)
        .collect();
    let mut placed = 0;
    while let Some(a) = frontier.pop() {
        placed += 1;
        let d = depth.get(a).copied().unwrap_or(0);
        level.insert(a.clone(), d);
        if let Some(targets) = succ.get(a) {
            for t in targets {
                let e = depth.entry(t).or_insert(0);
                *e = (*e).max(d + 1);
                let deg = indegree.get_mut(t).expect("node registered");
                *deg -= 1;
                if *deg == 0 {
                    frontier.push(t);
                }
            }
        }
    }

    if placed < nodes.len() {
        let remaining: BTreeSet<&Atom> = indegree
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(a, _)| *a)
            .collect();
        return Err(SolverError::CyclicTheory {
            cycle: find_cycle(&remaining, &succ),
        });
    }

    let height = level.values().copied().max().map_or(0, |m| m + 1);
    let mut layers = vec![Vec::new(); height];
    for (atom, &l) in &level {
        layers[l].push(atom.clone());
    }
    for layer in &mut layers {
        layer.sort();
    }
    Ok(Strata { layers, level })
}

/// Every unplaced atom keeps an unplaced predecessor, so walking
/// predecessors inside that set must revisit an atom.
fn find_cycle(remaining: &BTreeSet<&Atom>, succ: &BTreeMap<&Atom, BTreeSet<&Atom>>) -> Vec<String> {
    let mut pred: BTreeMap<&Atom, &Atom> = BTreeMap::new();
    for (from, targets) in succ {
        if !remaining.contains(from) {
            continue;
        }
        for t in targets {
            if remaining.contains(t) {
                pred.entry(*t).or_insert(*from);
            }
        }
    }
    let Some(&start) = remaining.iter().next() else {
        return Vec::new();
    };
    let mut path: Vec<&Atom> = vec![start];
    let mut pos: HashMap<&Atom, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    while let Some(&prev) = pred.get(cur) {
        if let Some(&i) = pos.get(prev) {
            let mut cycle: Vec<String> = path[i..].iter().rev().map(|a| a.to_string()).collect();
            cycle.insert(0, prev.to_string());
            cycle.dedup();
            if cycle.first() != cycle.last() {
                cycle.push(cycle[0].clone());
            }
            return cycle;
        }
        pos.insert(prev, path.len());
        path.push(prev);
        cur = prev;
    }
    path.iter().map(|a| a.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{ground, NoKnowledge};
    use crate::theory::{tweety, DefeasibleTheory, Literal, Rule, RuleId, TemplateKind};

    fn unary(s: &str, p: &str) -> Atom {
        Literal::triple(s, p, None, false).atom
    }

    #[test]
    fn tweety_layers() {
        let (t, _) = tweety();
        let s = stratify(&ground(&t, &NoKnowledge).unwrap()).unwrap();
        assert_eq!(
            s.layers,
            vec![
                vec![unary("Tweety", "be a penguin")],
                vec![unary("Tweety", "be a bird")],
                vec![unary("Tweety", "fly")],
            ]
        );
    }

    #[test]
    fn no_rules_gives_single_fact_stratum() {
        let t = DefeasibleTheory {
            facts: vec![
                Literal::triple("dog", "hug", Some("cat"), false),
                Literal::triple("pig", "call", None, true),
            ],
            ..Default::default()
        };
        let s = stratify(&ground(&t, &NoKnowledge).unwrap()).unwrap();
        assert_eq!(s.layers.len(), 1);
        assert_eq!(s.layers[0].len(), 2);
    }

    #[test]
    fn two_cycle_is_reported() {
        let a = Literal::triple("a", "p", None, false);
        let b = Literal::triple("b", "p", None, false);
        let t = DefeasibleTheory {
            facts: vec![],
            rules: vec![
                Rule::new(RuleId(1), TemplateKind::T3, vec![a.clone()], b.clone()),
                Rule::new(RuleId(2), TemplateKind::T3, vec![b], a),
            ],
            preferences: vec![],
        };
        match stratify(&ground(&t, &NoKnowledge).unwrap()) {
            Err(SolverError::CyclicTheory { cycle }) => {
                assert_eq!(cycle.len(), 3);
                assert_eq!(cycle.first(), cycle.last());
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }
}
