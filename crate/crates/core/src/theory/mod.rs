//! Logical vocabulary and the defeasible theory representation.
//!
//! A [`DefeasibleTheory`] is a set of ground facts, a list of rules built from
//! six fixed templates, and pairwise preferences between rules. Literals are
//! signed triples `(subject, predicate, object)`; the object is optional so
//! unary statements ("Tweety flies") fit the same shape.

mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use validate::{validate_theory, ValidationReport, Violation};

/// Reserved token for the single bound variable a rule may carry.
pub const VARIABLE: &str = "?X";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("empty identifier")]
    EmptyName,
    #[error("name {0:?} collides with the reserved variable token")]
    ReservedName(String),
    #[error("malformed rule id {0:?}")]
    BadRuleId(String),
    #[error("question {0} is not ground")]
    NonGroundQuestion(Box<Literal>),
    #[error("question {0} uses an out-of-vocabulary predicate")]
    ForeignQuestion(Box<Literal>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Entity(String);

impl Entity {
    pub fn new(name: impl Into<String>) -> Result<Self, TheoryError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(TheoryError::EmptyName);
        }
        if name.starts_with('?') {
            return Err(TheoryError::ReservedName(name));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Entity {
    type Error = TheoryError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Entity::new(s)
    }
}

impl From<Entity> for String {
    fn from(e: Entity) -> String {
        e.0
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Subject position of a literal: a concrete entity or the rule's variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Term {
    Entity(Entity),
    Var,
}

impl Term {
    pub fn entity(name: &str) -> Self {
        Term::Entity(Entity::new(name).expect("valid entity name"))
    }

    pub fn as_entity(&self) -> Option<&Entity> {
        match self {
            Term::Entity(e) => Some(e),
            Term::Var => None,
        }
    }
}

impl TryFrom<String> for Term {
    type Error = TheoryError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s == VARIABLE {
            Ok(Term::Var)
        } else {
            Entity::new(s).map(Term::Entity)
        }
    }
}

impl From<Term> for String {
    fn from(t: Term) -> String {
        match t {
            Term::Entity(e) => e.0,
            Term::Var => VARIABLE.to_string(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Entity(e) => e.fmt(f),
            Term::Var => f.write_str(VARIABLE),
        }
    }
}

/// An out-of-vocabulary statement whose truth needs background knowledge.
///
/// `relation` and `args` are the machine form read by the knowledge oracle of
/// `category`; `refs` lists other entities the statement mentions; `phrase` is
/// the third-person verb phrase used when rendering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ForeignPredicate {
    pub category: String,
    pub relation: String,
    pub args: Vec<String>,
    pub refs: Vec<Entity>,
    pub phrase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Predicate {
    Known(String),
    Foreign(ForeignPredicate),
}

impl Predicate {
    pub fn known(name: &str) -> Self {
        Predicate::Known(name.to_string())
    }

    pub fn as_foreign(&self) -> Option<&ForeignPredicate> {
        match self {
            Predicate::Foreign(f) => Some(f),
            Predicate::Known(_) => None,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Known(p) => f.write_str(p),
            Predicate::Foreign(fp) => write!(f, "[{}] {}", fp.category, fp.phrase),
        }
    }
}

/// Unsigned triple; the unit of stratification.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub subject: Term,
    pub predicate: Predicate,
    pub object: Option<Entity>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.object {
            Some(o) => write!(f, "({}, {}, {})", self.subject, self.predicate, o),
            None => write!(f, "({}, {})", self.subject, self.predicate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    #[serde(flatten)]
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn new(subject: Term, predicate: Predicate, object: Option<Entity>, negated: bool) -> Self {
        Self {
            atom: Atom {
                subject,
                predicate,
                object,
            },
            negated,
        }
    }

    /// Ground literal over vocabulary names. Panics on an invalid name.
    pub fn triple(subject: &str, predicate: &str, object: Option<&str>, negated: bool) -> Self {
        Self::new(
            Term::entity(subject),
            Predicate::known(predicate),
            object.map(|o| Entity::new(o).expect("valid entity name")),
            negated,
        )
    }

    pub fn subject(&self) -> &Term {
        &self.atom.subject
    }

    pub fn predicate(&self) -> &Predicate {
        &self.atom.predicate
    }

    pub fn object(&self) -> Option<&Entity> {
        self.atom.object.as_ref()
    }

    pub fn negate(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self.atom.subject, Term::Var)
    }

    pub fn is_foreign(&self) -> bool {
        matches!(self.atom.predicate, Predicate::Foreign(_))
    }

    /// Replaces the variable (if any) with `e`.
    pub fn bind(&self, e: &Entity) -> Literal {
        let mut out = self.clone();
        if out.atom.subject == Term::Var {
            out.atom.subject = Term::Entity(e.clone());
        }
        out
    }

    /// Entities mentioned by the literal, including foreign references.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        let refs = self
            .atom
            .predicate
            .as_foreign()
            .map(|f| f.refs.as_slice())
            .unwrap_or(&[]);
        self.atom
            .subject
            .as_entity()
            .into_iter()
            .chain(self.atom.object.iter())
            .chain(refs.iter())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        self.atom.fmt(f)
    }
}

/// Ordinal rule label, serialized as `RuleN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RuleId(pub u32);

impl std::str::FromStr for RuleId {
    type Err = TheoryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("Rule")
            .and_then(|n| n.parse::<u32>().ok())
            .filter(|&n| n > 0)
            .map(RuleId)
            .ok_or_else(|| TheoryError::BadRuleId(s.to_string()))
    }
}

impl TryFrom<String> for RuleId {
    type Error = TheoryError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RuleId> for String {
    fn from(r: RuleId) -> String {
        r.to_string()
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rule{}", self.0)
    }
}

/// The six rule shapes.
///
/// * T1 `forall X: (X,p1,e1) => (X,p2,e2)`
/// * T2 `forall X: (X,p1,e1) & (X,p2,e2) => (X,p3,e3)`
/// * T3 `(e1,p1,e2) => (e2,p2,e3)`
/// * T4 `(e1,p1,e2) & (e3,p2,e2) => (e2,p3,e4)`
/// * T5 `(e1,foreign) => (e1,p2,e2)`
/// * T6 `exists X: (X,p1,e1) => (e2,p2,e3)`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateKind {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 6] = [
        TemplateKind::T1,
        TemplateKind::T2,
        TemplateKind::T3,
        TemplateKind::T4,
        TemplateKind::T5,
        TemplateKind::T6,
    ];

    pub fn quantifier(self) -> Quantifier {
        match self {
            TemplateKind::T1 | TemplateKind::T2 => Quantifier::Forall,
            TemplateKind::T6 => Quantifier::Exists,
            _ => Quantifier::None,
        }
    }

    pub fn body_len(self) -> usize {
        match self {
            TemplateKind::T2 | TemplateKind::T4 => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::T1 => "T1",
            TemplateKind::T2 => "T2",
            TemplateKind::T3 => "T3",
            TemplateKind::T4 => "T4",
            TemplateKind::T5 => "T5",
            TemplateKind::T6 => "T6",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    None,
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: RuleId,
    pub template: TemplateKind,
    pub quantifier: Quantifier,
    pub body: Vec<Literal>,
    pub head: Literal,
}

impl Rule {
    pub fn new(id: RuleId, template: TemplateKind, body: Vec<Literal>, head: Literal) -> Self {
        Self {
            id,
            template,
            quantifier: template.quantifier(),
            body,
            head,
        }
    }

    pub fn logic(&self) -> RuleLogic {
        RuleLogic {
            template: self.template,
            quantifier: self.quantifier,
            body: self.body.clone(),
            head: self.head.clone(),
        }
    }
}

/// Structured form of a rule as it appears under the `logic` key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleLogic {
    pub template: TemplateKind,
    pub quantifier: Quantifier,
    pub body: Vec<Literal>,
    pub head: Literal,
}

#[derive(Serialize, Deserialize)]
struct RuleRepr {
    id: RuleId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    logic: RuleLogic,
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RuleRepr {
            id: self.id,
            text: None,
            logic: self.logic(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RuleRepr::deserialize(d)?;
        Ok(Rule {
            id: r.id,
            template: r.logic.template,
            quantifier: r.logic.quantifier,
            body: r.logic.body,
            head: r.logic.head,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Preference {
    pub winner: RuleId,
    pub loser: RuleId,
}

impl Preference {
    pub fn new(winner: RuleId, loser: RuleId) -> Self {
        Self { winner, loser }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefeasibleTheory {
    pub facts: Vec<Literal>,
    pub rules: Vec<Rule>,
    pub preferences: Vec<Preference>,
}

impl DefeasibleTheory {
    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn prefers(&self, winner: RuleId, loser: RuleId) -> bool {
        self.preferences.contains(&Preference::new(winner, loser))
    }

    /// Entities of facts and rules; the domain quantified rules range over.
    pub fn universe(&self) -> Vec<Entity> {
        let mut out: Vec<Entity> = self
            .facts
            .iter()
            .chain(self.rules.iter().flat_map(|r| r.body.iter().chain([&r.head])))
            .flat_map(|l| l.entities().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// A ground, in-vocabulary literal asked about a theory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Literal", into = "Literal")]
pub struct Question(Literal);

impl Question {
    pub fn new(literal: Literal) -> Result<Self, TheoryError> {
        if !literal.is_ground() {
            return Err(TheoryError::NonGroundQuestion(Box::new(literal)));
        }
        if literal.is_foreign() {
            return Err(TheoryError::ForeignQuestion(Box::new(literal)));
        }
        Ok(Self(literal))
    }

    pub fn literal(&self) -> &Literal {
        &self.0
    }

    pub fn negate(&self) -> Question {
        Question(self.0.negate())
    }
}

impl TryFrom<Literal> for Question {
    type Error = TheoryError;
    fn try_from(l: Literal) -> Result<Self, Self::Error> {
        Question::new(l)
    }
}

impl From<Question> for Literal {
    fn from(q: Question) -> Literal {
        q.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Proved,
    Disproved,
    Unknown,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Proved, Label::Disproved, Label::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Proved => "proved",
            Label::Disproved => "disproved",
            Label::Unknown => "unknown",
        }
    }

    /// Label of the negated question.
    pub fn flip(self) -> Label {
        match self {
            Label::Proved => Label::Disproved,
            Label::Disproved => Label::Proved,
            Label::Unknown => Label::Unknown,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proved" => Ok(Label::Proved),
            "disproved" => Ok(Label::Disproved),
            "unknown" => Ok(Label::Unknown),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// The penguin theory: Tweety is a penguin; penguins are birds; birds fly;
/// penguins do not fly; the last rule beats the flying rule.
pub fn tweety() -> (DefeasibleTheory, Question) {
    let x = |p: &str, neg: bool| Literal::new(Term::Var, Predicate::known(p), None, neg);
    let theory = DefeasibleTheory {
        facts: vec![Literal::triple("Tweety", "be a penguin", None, false)],
        rules: vec![
            Rule::new(RuleId(1), TemplateKind::T1, vec![x("be a penguin", false)], x("be a bird", false)),
            Rule::new(RuleId(2), TemplateKind::T1, vec![x("be a bird", false)], x("fly", false)),
            Rule::new(RuleId(3), TemplateKind::T1, vec![x("be a penguin", false)], x("fly", true)),
        ],
        preferences: vec![Preference::new(RuleId(3), RuleId(2))],
    };
    let q = Question::new(Literal::triple("Tweety", "fly", None, false)).expect("ground question");
    (theory, q)
}
