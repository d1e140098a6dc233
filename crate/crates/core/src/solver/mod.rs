//! Defeasible entailment.
//!
//! The production path grounds the theory, layers ground atoms by rule
//! dependency, and evaluates one stratum at a time so that "the opposing
//! body cannot be proved" is decided exactly before it is needed. A separate
//! guess-and-check evaluator in [`brute`] enumerates candidate outcomes for
//! small theories and is used as an oracle in tests.
//!
//! Reasoners are interchangeable behind [`Reasoner`] and looked up by name in
//! a [`ReasonerRegistry`].

mod brute;
mod entail;
mod ground;
mod proof;
mod stratify;

use thiserror::Error;

use crate::theory::{DefeasibleTheory, Entity, ForeignPredicate, Label, Literal, Question};

pub use brute::{brute_force_entail, DEFAULT_ATOM_BOUND};
pub use entail::{
    check_defeasible_consistency, entail, ConsistencyReport, EntailmentResult, UnresolvedConflict,
};
pub use ground::{ground, GroundBody, GroundRule, GroundRuleSet};
pub use proof::{verify_proof, ConflictKind, ConflictResolution, Proof, ProofError, ProofStep};
pub use stratify::{stratify, Strata};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("theory is cyclic: {}", cycle.join(" -> "))]
    CyclicTheory { cycle: Vec<String> },
    #[error("cannot evaluate {literal}: no knowledge oracle for category {category:?}")]
    UnresolvedForeignLiteral { literal: String, category: String },
    #[error("facts contain both {0} and its negation")]
    ContradictoryFacts(String),
    #[error("theory too large for exhaustive evaluation ({size} > {bound})")]
    TooLarge { size: usize, bound: usize },
    #[error("exhaustive evaluation found {0} consistent outcomes instead of one")]
    NotUnique(usize),
}

/// The oracle does not know the category it was asked about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCategory(pub String);

/// Decides out-of-vocabulary body literals from the theory's facts.
pub trait KnowledgeOracle: Sync {
    /// Truth of the positive statement `subject <predicate>`; `None` when the
    /// facts do not settle it.
    fn evaluate(
        &self,
        subject: &Entity,
        predicate: &ForeignPredicate,
        facts: &[Literal],
    ) -> Result<Option<bool>, UnknownCategory>;
}

/// Oracle for theories without foreign literals; rejects every category.
pub struct NoKnowledge;

impl KnowledgeOracle for NoKnowledge {
    fn evaluate(
        &self,
        _subject: &Entity,
        predicate: &ForeignPredicate,
        _facts: &[Literal],
    ) -> Result<Option<bool>, UnknownCategory> {
        Err(UnknownCategory(predicate.category.clone()))
    }
}

/// Whether a foreign body literal (with its sign) is satisfied.
pub(crate) fn foreign_satisfied(
    literal: &Literal,
    facts: &[Literal],
    oracle: &dyn KnowledgeOracle,
) -> Result<bool, SolverError> {
    let fp = literal
        .predicate()
        .as_foreign()
        .expect("foreign_satisfied on in-vocabulary literal");
    let unresolved = |category: String| SolverError::UnresolvedForeignLiteral {
        literal: literal.to_string(),
        category,
    };
    let subject = literal
        .subject()
        .as_entity()
        .ok_or_else(|| unresolved(fp.category.clone()))?;
    let verdict = oracle
        .evaluate(subject, fp, facts)
        .map_err(|UnknownCategory(c)| unresolved(c))?;
    Ok(verdict == Some(!literal.negated))
}

pub trait Reasoner: Send + Sync {
    fn name(&self) -> &'static str;

    fn label(
        &self,
        theory: &DefeasibleTheory,
        question: &Question,
        oracle: &dyn KnowledgeOracle,
    ) -> Result<Label, SolverError>;
}

/// Stratified forward evaluation; the default.
pub struct Stratified;

impl Reasoner for Stratified {
    fn name(&self) -> &'static str {
        "stratified"
    }

    fn label(
        &self,
        theory: &DefeasibleTheory,
        question: &Question,
        oracle: &dyn KnowledgeOracle,
    ) -> Result<Label, SolverError> {
        entail(theory, question, oracle).map(|r| r.label)
    }
}

/// Exhaustive guess-and-check; only for small theories.
pub struct BruteForce {
    pub bound: usize,
}

impl Default for BruteForce {
    fn default() -> Self {
        Self {
            bound: DEFAULT_ATOM_BOUND,
        }
    }
}

impl Reasoner for BruteForce {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn label(
        &self,
        theory: &DefeasibleTheory,
        question: &Question,
        oracle: &dyn KnowledgeOracle,
    ) -> Result<Label, SolverError> {
        brute_force_entail(theory, question, oracle, self.bound)
    }
}

pub struct ReasonerRegistry {
    entries: Vec<Box<dyn Reasoner>>,
}

impl ReasonerRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Stratified));
        r.register(Box::new(BruteForce::default()));
        r
    }

    /// Adds a reasoner, replacing any previous one with the same name.
    pub fn register(&mut self, reasoner: Box<dyn Reasoner>) {
        self.entries.retain(|r| r.name() != reasoner.name());
        self.entries.push(reasoner);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Reasoner> {
        self.entries
            .iter()
            .find(|r| r.name() == name)
            .map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|r| r.name()).collect()
    }
}

impl Default for ReasonerRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}
