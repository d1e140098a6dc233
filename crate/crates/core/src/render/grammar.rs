use crate::theory::{Entity, Literal, Predicate, Term};

/// "the dog", or the bare name when it is capitalized ("Tweety").
pub fn noun_phrase(e: &Entity) -> String {
    let s = e.as_str();
    if s.chars().next().is_some_and(char::is_uppercase) {
        s.to_string()
    } else {
        format!("the {s}")
    }
}

fn third_person_verb(verb: &str) -> String {
    match verb {
        "be" => return "is".into(),
        "have" => return "has".into(),
        "do" => return "does".into(),
        "go" => return "goes".into(),
        _ => {}
    }
    let sibilant = ["s", "sh", "ch", "x", "z"].iter().any(|e| verb.ends_with(e));
    if sibilant {
        return format!("{verb}es");
    }
    let mut rev = verb.chars().rev();
    if let (Some('y'), Some(prev)) = (rev.next(), rev.next()) {
        if !"aeiou".contains(prev) {
            return format!("{}ies", &verb[..verb.len() - 1]);
        }
    }
    format!("{verb}s")
}

fn split_verb(phrase: &str) -> (&str, &str) {
    match phrase.split_once(' ') {
        Some((v, rest)) => (v, rest),
        None => (phrase, ""),
    }
}

fn join(a: &str, b: &str) -> String {
    if b.is_empty() {
        a.to_string()
    } else {
        format!("{a} {b}")
    }
}

/// Third-person singular form of a base verb phrase: "owe money to" becomes
/// "owes money to"; negated, "does not owe money to".
pub fn conjugate(phrase: &str, negated: bool) -> String {
    let (verb, rest) = split_verb(phrase);
    match (verb, negated) {
        ("be", true) => join("is not", rest),
        (_, true) => join(&format!("does not {verb}"), rest),
        (_, false) => join(&third_person_verb(verb), rest),
    }
}

/// Verb phrase of a literal without its subject, e.g. "does not hug the cat".
pub fn verb_phrase(l: &Literal) -> String {
    let vp = match l.predicate() {
        Predicate::Known(p) => conjugate(p, l.negated),
        // foreign phrases are already conjugated
        Predicate::Foreign(f) if l.negated => format!("does not satisfy that it {}", f.phrase),
        Predicate::Foreign(f) => f.phrase.clone(),
    };
    match l.object() {
        Some(o) => format!("{vp} {}", noun_phrase(o)),
        None => vp,
    }
}

/// Full clause, e.g. "the dog hugs the cat". A negated foreign literal
/// reads "it is not true that the dog ...".
pub fn clause(l: &Literal) -> String {
    let subject = match l.subject() {
        Term::Entity(e) => noun_phrase(e),
        Term::Var => "something".to_string(),
    };
    match l.predicate() {
        Predicate::Foreign(f) if l.negated => format!("it is not true that {subject} {}", f.phrase),
        _ => format!("{subject} {}", verb_phrase(l)),
    }
}

pub fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn number_word(n: u32) -> String {
    const WORDS: [&str; 13] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve",
    ];
    WORDS
        .get(n as usize)
        .map_or_else(|| n.to_string(), |w| w.to_string())
}

pub fn article(noun: &str) -> &'static str {
    match noun.chars().next() {
        Some(c) if "aeiouAEIOU".contains(c) => "an",
        _ => "a",
    }
}
