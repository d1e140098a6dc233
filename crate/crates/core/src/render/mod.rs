//! Natural-language rendering of theories, questions and proofs.
//!
//! Wordings live in a template file with one `tag<TAB>split<TAB>pattern`
//! entry per line (see `data/templates.txt`). Rule templates are chosen per
//! rule as a pure function of the example seed and the rule id. Proof text
//! names rules verbatim as `RuleN` so the scorer can recover them.

pub mod grammar;

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::rng::DetRng;
use crate::solver::{ConflictKind, Proof, ProofStep};
use crate::theory::{DefeasibleTheory, Label, Literal, Predicate, Question, Rule, RuleId, TemplateKind, Term};
use crate::vocab::Side;
use grammar::{capitalize, clause, noun_phrase, verb_phrase};

pub const BUILTIN_TEMPLATES: &str = include_str!("../../data/templates.txt");

pub const UNKNOWN_PROOF: &str =
    "The provided information is not enough to prove or disprove the statement. The answer is unknown.";

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("no {tag} template for the {side:?} split")]
    MissingTemplate { tag: String, side: Side },
    #[error("proof references {0}, which the theory does not define")]
    DanglingRuleId(RuleId),
    #[error("template line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Preamble,
    RulesHeader,
    Preference,
    Question,
    ProofRequest,
    Rule(TemplateKind),
}

impl Tag {
    fn parse(s: &str) -> Option<Tag> {
        Some(match s {
            "preamble" => Tag::Preamble,
            "rules_header" => Tag::RulesHeader,
            "preference" => Tag::Preference,
            "question" => Tag::Question,
            "proof_request" => Tag::ProofRequest,
            other => Tag::Rule(TemplateKind::from_name(other)?),
        })
    }

    fn name(self) -> String {
        match self {
            Tag::Preamble => "preamble".into(),
            Tag::RulesHeader => "rules_header".into(),
            Tag::Preference => "preference".into(),
            Tag::Question => "question".into(),
            Tag::ProofRequest => "proof_request".into(),
            Tag::Rule(k) => k.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub tag: Tag,
    /// `None` for wordings shared by every split.
    pub side: Option<Side>,
    pub pattern: String,
}

impl Template {
    /// Longest stretch of literal text between slots.
    pub fn signature(&self) -> &str {
        let mut best = "";
        let mut rest = self.pattern.as_str();
        loop {
            let (chunk, tail) = match rest.find('{') {
                Some(i) => (&rest[..i], &rest[i..]),
                None => (rest, ""),
            };
            if chunk.len() > best.len() {
                best = chunk;
            }
            match tail.find('}') {
                Some(j) => rest = &tail[j + 1..],
                None => break,
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub templates: Vec<Template>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TEMPLATES).expect("bundled templates parse")
    }

    pub fn load(path: &Path) -> Result<Self, RenderError> {
        let text = std::fs::read_to_string(path).map_err(|source| RenderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, RenderError> {
        let mut templates = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| RenderError::Parse {
                line: n + 1,
                reason: reason.to_string(),
            };
            let mut cols = line.splitn(3, '\t');
            let (Some(tag), Some(side), Some(pattern)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(err("expected tag, split and pattern"));
            };
            let tag = Tag::parse(tag.trim()).ok_or_else(|| err("unknown tag"))?;
            let side = match side.trim() {
                "all" => None,
                s => Some(s.parse::<Side>().map_err(|e| err(&e))?),
            };
            templates.push(Template {
                tag,
                side,
                pattern: pattern.trim().to_string(),
            });
        }
        Ok(Self { templates })
    }

    /// Templates usable by `side`: its own plus the shared ones.
    pub fn options(&self, tag: Tag, side: Side) -> Vec<&Template> {
        self.templates
            .iter()
            .filter(|t| t.tag == tag && t.side.is_none_or(|s| s == side))
            .collect()
    }

    fn choose(&self, tag: Tag, side: Side, rng: &mut DetRng) -> Result<&Template, RenderError> {
        let opts = self.options(tag, side);
        if opts.is_empty() {
            return Err(RenderError::MissingTemplate { tag: tag.name(), side });
        }
        Ok(opts[rng.below(opts.len())])
    }

    fn shared(&self, tag: Tag, side: Side) -> Result<&Template, RenderError> {
        self.options(tag, side)
            .into_iter()
            .next()
            .ok_or(RenderError::MissingTemplate { tag: tag.name(), side })
    }

    /// Signatures of rule templates exclusive to `side`.
    pub fn signatures(&self, side: Side) -> Vec<String> {
        self.templates
            .iter()
            .filter(|t| matches!(t.tag, Tag::Rule(_)) && t.side == Some(side))
            .map(|t| t.signature().to_string())
            .collect()
    }
}

fn fill(pattern: &str, slots: &[(&str, String)]) -> String {
    let mut out = pattern.to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// Sentence for a rule, without the `RuleN:` prefix.
pub fn render_rule(rule: &Rule, templates: &TemplateSet, side: Side, seed: u64) -> Result<String, RenderError> {
    let mut rng = DetRng::fork(seed, "rule-template", rule.id.0 as u64);
    let t = templates.choose(Tag::Rule(rule.template), side, &mut rng)?;
    let mut slots = vec![("h", clause(&rule.head)), ("vh", verb_phrase(&rule.head))];
    for (i, b) in rule.body.iter().enumerate() {
        let n = i + 1;
        slots.push((if n == 1 { "b1" } else { "b2" }, clause(b)));
        slots.push((if n == 1 { "vb1" } else { "vb2" }, verb_phrase(b)));
    }
    Ok(fill(&t.pattern, &slots))
}

pub fn render_fact(fact: &Literal) -> String {
    format!("{}.", capitalize(&clause(fact)))
}

/// "does the dog hug the cat", "is Tweety not a bird".
pub fn interrogative(l: &Literal) -> String {
    let subject = match l.subject() {
        Term::Entity(e) => noun_phrase(e),
        Term::Var => "something".into(),
    };
    let not = if l.negated { " not" } else { "" };
    let object = l.object().map(|o| format!(" {}", noun_phrase(o))).unwrap_or_default();
    match l.predicate() {
        Predicate::Known(p) => {
            let (verb, rest) = p.split_once(' ').unwrap_or((p.as_str(), ""));
            let rest = if rest.is_empty() { String::new() } else { format!(" {rest}") };
            if verb == "be" {
                format!("is {subject}{not}{rest}{object}")
            } else {
                format!("does {subject}{not} {verb}{rest}{object}")
            }
        }
        Predicate::Foreign(f) => format!("is it{not} true that {subject} {}", f.phrase),
    }
}

/// Rendered problem and the per-rule sentences, in theory order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedProblem {
    pub text: String,
    pub rule_texts: Vec<String>,
}

pub fn render_problem(
    theory: &DefeasibleTheory,
    question: &Question,
    templates: &TemplateSet,
    side: Side,
    seed: u64,
) -> Result<RenderedProblem, RenderError> {
    let mut parts = vec![templates.shared(Tag::Preamble, side)?.pattern.clone()];
    parts.extend(theory.facts.iter().map(render_fact));
    parts.push(templates.shared(Tag::RulesHeader, side)?.pattern.clone());
    let mut rule_texts = Vec::with_capacity(theory.rules.len());
    for r in &theory.rules {
        let s = render_rule(r, templates, side, seed)?;
        parts.push(format!("{}: {s}", r.id));
        rule_texts.push(s);
    }
    let pref = templates.shared(Tag::Preference, side)?;
    for p in &theory.preferences {
        parts.push(fill(
            &pref.pattern,
            &[("w", p.winner.to_string()), ("l", p.loser.to_string())],
        ));
    }
    let q = templates.shared(Tag::Question, side)?;
    parts.push(fill(&q.pattern, &[("q", interrogative(question.literal()))]));
    parts.push(templates.shared(Tag::ProofRequest, side)?.pattern.clone());
    Ok(RenderedProblem {
        text: parts.join(" "),
        rule_texts,
    })
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Surface facts backing a foreign premise.
fn knowledge_facts<'t>(theory: &'t DefeasibleTheory, premise: &Literal) -> Vec<&'t Literal> {
    let Some(fp) = premise.predicate().as_foreign() else {
        return Vec::new();
    };
    let mut about: Vec<&crate::theory::Entity> = fp.refs.iter().collect();
    about.extend(premise.subject().as_entity());
    theory
        .facts
        .iter()
        .filter(|f| {
            f.predicate().as_foreign().is_some_and(|g| g.category == fp.category)
                && f.subject().as_entity().is_some_and(|s| about.contains(&s))
        })
        .collect()
}

fn step_sentences(theory: &DefeasibleTheory, step: &ProofStep, out: &mut Vec<String>) -> Vec<String> {
    let mut premises = Vec::new();
    for p in &step.premises {
        if p.is_foreign() {
            let surface: Vec<String> = knowledge_facts(theory, p).iter().map(|f| clause(f)).collect();
            out.push(format!("We know that {}, so {}.", join_and(&surface), clause(p)));
        }
        premises.push(clause(p));
    }
    premises
}

/// Chain-of-thought text for a proof, ending with the label.
pub fn render_proof(
    proof: &Proof,
    theory: &DefeasibleTheory,
    question: &Question,
    label: Label,
    derived: &BTreeSet<Literal>,
) -> Result<String, RenderError> {
    if label == Label::Unknown {
        return Ok(UNKNOWN_PROOF.to_string());
    }
    for id in proof
        .steps
        .iter()
        .map(|s| s.rule)
        .chain(proof.conflicts.iter().flat_map(|c| [c.winner, c.loser]))
    {
        if theory.rule(id).is_none() {
            return Err(RenderError::DanglingRuleId(id));
        }
    }

    let mut out = Vec::new();
    for step in &proof.steps {
        let premises = step_sentences(theory, step, &mut out);
        let conclusion = clause(&step.conclusion);
        out.push(format!(
            "We know that {}, and according to {}, {conclusion}.",
            join_and(&premises),
            step.rule
        ));
        for c in proof.conflicts.iter().filter(|c| {
            theory
                .rule(c.loser)
                .is_some_and(|l| opposes(l, &step.conclusion))
                && (c.winner == step.rule || c.kind == ConflictKind::Type1)
        }) {
            let sentence = match c.kind {
                ConflictKind::Type1 => format!(
                    "{w} is preferred over {l}, so {w} overrides {l} and we conclude that {conclusion}.",
                    w = c.winner,
                    l = c.loser
                ),
                ConflictKind::Type2 => {
                    let loser = theory.rule(c.loser).expect("checked above");
                    let blocked = blocked_premise(loser, &step.conclusion, derived);
                    format!(
                        "{l} is preferred over {w}, but {l} cannot be applied because we cannot prove that {blocked}, so {w} overrides {l} and we conclude that {conclusion}.",
                        w = c.winner,
                        l = c.loser
                    )
                }
            };
            out.push(sentence);
        }
    }
    if proof.steps.is_empty() {
        let goal = match label {
            Label::Disproved => question.literal().negate(),
            _ => question.literal().clone(),
        };
        out.push(format!("We know that {}.", clause(&goal)));
    }
    out.push(format!("The answer is {label}."));
    Ok(out.join(" "))
}

/// Whether `rule`'s head can be the negation of `conclusion`.
fn opposes(rule: &Rule, conclusion: &Literal) -> bool {
    let head = match conclusion.subject() {
        Term::Entity(e) => rule.head.bind(e),
        Term::Var => rule.head.clone(),
    };
    head == conclusion.negate()
}

/// A body literal of `loser` (instantiated against `conclusion`) that does
/// not hold.
fn blocked_premise(loser: &Rule, conclusion: &Literal, derived: &BTreeSet<Literal>) -> String {
    let body: Vec<Literal> = match (loser.template, conclusion.subject()) {
        (TemplateKind::T1 | TemplateKind::T2, Term::Entity(e)) => {
            loser.body.iter().map(|b| b.bind(e)).collect()
        }
        _ => loser.body.clone(),
    };
    let pick = body
        .iter()
        .find(|b| !b.is_foreign() && b.is_ground() && !derived.contains(b))
        .or_else(|| body.iter().find(|b| b.is_foreign()))
        .or_else(|| body.first())
        .expect("rules have bodies");
    clause(pick)
}
