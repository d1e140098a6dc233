use super::*;
use crate::solver::{verify_proof, ConflictKind};
use crate::theory::ForeignPredicate;

fn res() -> Resources {
    Resources::builtin()
}

fn quiet(depth: usize) -> GenParams {
    GenParams {
        depth,
        p_conf: 0.0,
        p_miss_info: 0.0,
        distractors_per_step: 0,
        ..GenParams::default()
    }
}

struct Setup {
    res: Resources,
    rng: DetRng,
    pool: EntityPool,
    q: Question,
}

fn setup(seed: u64) -> Setup {
    let res = res();
    let mut rng = DetRng::new(seed);
    let mut pool = EntityPool::new(res.vocab.entities(Side::Train), &mut rng);
    let q = sample_question(&mut pool, res.vocab.predicates(Side::Train), &mut rng).unwrap();
    Setup { res, rng, pool, q }
}

fn build(params: &GenParams, seed: u64) -> (Question, GeneratedTheory) {
    let mut s = setup(seed);
    let g = generate_theory(&s.q, params, &s.res, &mut s.pool, &mut s.rng).unwrap();
    (s.q, g)
}

#[test]
fn pool_hands_out_each_entity_once() {
    let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let mut rng = DetRng::new(1);
    let mut pool = EntityPool::new(&names, &mut rng);
    let got: BTreeSet<Entity> = (0..3).map(|_| pool.take().unwrap()).collect();
    assert_eq!(got.len(), 3);
    assert!(got.iter().all(|e| pool.is_consumed(e)));
    assert!(matches!(pool.take(), Err(GenError::PoolExhausted)));
}

#[test]
fn questions_use_fresh_train_vocabulary() {
    let r = res();
    let mut rng = DetRng::new(5);
    let mut pool = EntityPool::new(r.vocab.entities(Side::Train), &mut rng);
    let a = sample_question(&mut pool, r.vocab.predicates(Side::Train), &mut rng).unwrap();
    let b = sample_question(&mut pool, r.vocab.predicates(Side::Train), &mut rng).unwrap();
    let ea: BTreeSet<_> = a.literal().entities().collect();
    assert!(b.literal().entities().all(|e| !ea.contains(e)));

    for seed in 0..1000 {
        let mut rng = DetRng::new(seed);
        let mut pool = EntityPool::new(r.vocab.entities(Side::Train), &mut rng);
        let q = sample_question(&mut pool, r.vocab.predicates(Side::Train), &mut rng).unwrap();
        let l = q.literal();
        assert!(l
            .entities()
            .all(|e| r.vocab.train_entities.iter().any(|n| n == e.as_str())));
        let Predicate::Known(p) = l.predicate() else { panic!() };
        assert!(r.vocab.train_predicates.contains(p));
    }
}

#[test]
fn pool_needs_two_entities_for_a_question() {
    let mut rng = DetRng::new(0);
    let mut pool = EntityPool::new(&["solo".to_string()], &mut rng);
    assert!(matches!(
        sample_question(&mut pool, &["hug".to_string()], &mut rng),
        Err(GenError::PoolExhausted)
    ));
}

#[test]
fn depth_zero_adds_the_question_as_a_fact() {
    let (q, g) = build(&quiet(0), 3);
    assert_eq!(g.theory.facts, vec![q.literal().clone()]);
    assert!(g.theory.rules.is_empty());
}

#[test]
fn depth_one_without_conflict_is_a_single_application() {
    for seed in 0..20 {
        let (q, g) = build(&quiet(1), seed);
        assert_eq!(g.theory.rules.len(), 1);
        let r = entail(&g.theory, &q, &KnowledgeRegistry::builtin()).unwrap();
        assert_eq!(r.label, Label::Proved);
        assert_eq!(r.proof.unwrap().steps.len(), 1);
        // every body literal, instantiated, is among the facts
        assert_eq!(g.theory.facts.len(), g.theory.rules[0].body.len());
    }
}

#[test]
fn forced_type2_leaves_one_opposing_body_literal_unsupported() {
    let params = GenParams {
        p_conf: 1.0,
        p_conf_type1: 0.0,
        ..quiet(1)
    };
    let reg = KnowledgeRegistry::builtin();
    for seed in 0..30 {
        let (q, g) = build(&params, seed);
        assert_eq!(g.theory.rules.len(), 2);
        let (r, r2) = (&g.theory.rules[0], &g.theory.rules[1]);
        assert_eq!(r2.head.negated, !r.head.negated);
        assert_eq!(g.theory.preferences, vec![Preference::new(r2.id, r.id)]);

        // a body literal is supported when some fact matches it up to the variable
        let missing = r2
            .body
            .iter()
            .filter(|b| {
                !g.theory.facts.iter().any(|f| {
                    f.predicate() == b.predicate()
                        && f.object() == b.object()
                        && f.negated == b.negated
                        && (b.subject() == &Term::Var || b.subject() == f.subject())
                })
            })
            .count();
        assert_eq!(missing, 1, "seed {seed}");

        let res = entail(&g.theory, &q, &reg).unwrap();
        assert_eq!(res.label, Label::Proved);
        assert!(check_defeasible_consistency(&g.theory, &reg).unwrap().is_consistent());
        let proof = res.proof.unwrap();
        assert_eq!(
            proof.conflicts.iter().map(|c| c.kind).collect::<Vec<_>>(),
            vec![ConflictKind::Type2]
        );
        verify_proof(&g.theory, &q, Label::Proved, &proof, &reg).unwrap();
    }
}

#[test]
fn no_distractors_leaves_theory_unchanged() {
    let params = quiet(2);
    let Setup { res: r, mut rng, mut pool, q } = setup(9);
    let mut g = generate_theory(&q, &params, &r, &mut pool, &mut rng).unwrap();
    let before = g.theory.clone();
    assert_eq!(add_distractors(&mut g, &q, &params, &r, &mut pool, &mut rng).unwrap(), 0);
    assert_eq!(g.theory, before);
}

#[test]
fn distractors_stay_out_of_the_proof() {
    let params = GenParams {
        distractors_per_step: 1,
        ..quiet(2)
    };
    for seed in 0..10 {
        let Setup { res: r, mut rng, mut pool, q } = setup(seed);
        let mut g = generate_theory(&q, &params, &r, &mut pool, &mut rng).unwrap();
        let before = entail(&g.theory, &q, &r.knowledge).unwrap();
        let kept = add_distractors(&mut g, &q, &params, &r, &mut pool, &mut rng).unwrap();
        assert!(kept >= 1);
        let after = entail(&g.theory, &q, &r.knowledge).unwrap();
        assert_eq!(after.label, before.label);
        let proof = after.proof.unwrap();
        let premises: BTreeSet<&Literal> = proof.steps.iter().flat_map(|s| s.premises.iter()).collect();
        assert!(g.theory.facts.iter().any(|f| !premises.contains(f)));
    }
}

#[test]
fn replacing_the_only_support_makes_the_question_unknown() {
    let r = res();
    let (q, g) = build(&quiet(1), 11);
    let mut rng = DetRng::new(2);
    let (t, trace) =
        perturb_to_unknown(&g.theory, &q, r.vocab.predicates(Side::Train), &r.knowledge, &mut rng).unwrap();
    assert!(!trace.is_empty());
    assert_eq!(entail(&t, &q, &r.knowledge).unwrap().label, Label::Unknown);
}

#[test]
fn unknown_theory_is_rejected() {
    let r = res();
    let q = Question::new(Literal::triple("dog", "attack the green fields of", Some("cat"), false)).unwrap();
    let mut rng = DetRng::new(0);
    assert!(matches!(
        perturb_to_unknown(&DefeasibleTheory::default(), &q, r.vocab.predicates(Side::Train), &r.knowledge, &mut rng),
        Err(GenError::AlreadyUnknown)
    ));
}

fn money(subject: &str, relation: &str, args: &[&str], refs: &[&str]) -> Literal {
    Literal::new(
        Term::entity(subject),
        Predicate::Foreign(ForeignPredicate {
            category: "money".into(),
            relation: relation.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            refs: refs.iter().map(|s| Entity::new(*s).unwrap()).collect(),
            phrase: String::new(),
        }),
        None,
        false,
    )
}

#[test]
fn less_money_for_the_frog_leaves_the_question_open() {
    let reg = KnowledgeRegistry::builtin();
    let q = Question::new(Literal::triple("frog", "attack the green fields of", Some("dog"), false)).unwrap();
    let rule = Rule::new(
        RuleId(1),
        TemplateKind::T5,
        vec![money("frog", "more_money", &[], &["cat", "pig"])],
        q.literal().clone(),
    );
    let mut t = DefeasibleTheory {
        facts: vec![
            money("frog", "money", &["100"], &[]),
            money("cat", "money", &["30"], &[]),
            money("pig", "money", &["40"], &[]),
        ],
        rules: vec![rule],
        preferences: vec![],
    };
    assert_eq!(entail(&t, &q, &reg).unwrap().label, Label::Proved);
    t.facts[0] = money("frog", "money", &["50"], &[]);
    assert_eq!(entail(&t, &q, &reg).unwrap().label, Label::Unknown);
}

#[test]
fn depth_one_example_round_trips() {
    let r = res();
    let params = quiet(1);
    let e = generate_example(&params, Label::Proved, 77, &r).unwrap();
    assert_eq!(e.label, Label::Proved);
    assert_eq!(e.proof.as_ref().unwrap().steps.len(), 1);
    assert_eq!(entail(&e.theory, &e.question, &r.knowledge).unwrap().label, Label::Proved);

    let d = generate_example(&params, Label::Disproved, 77, &r).unwrap();
    assert_eq!(d.theory, e.theory);
    assert_eq!(d.question, e.question.negate());
    assert_eq!(d.label, Label::Disproved);
}

#[test]
fn generation_is_deterministic() {
    let r = res();
    let params = GenParams {
        depth: 2,
        ..GenParams::default()
    };
    for label in Label::ALL {
        let a = generate_example(&params, label, 1234, &r);
        let b = generate_example(&params, label, 1234, &r);
        match (a, b) {
            (Ok(a), Ok(b)) => assert_eq!(a, b),
            (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
            _ => panic!("runs disagree"),
        }
    }
}

#[test]
fn rule_ids_follow_theory_order() {
    let r = res();
    let params = GenParams {
        depth: 2,
        ..GenParams::default()
    };
    let e = generate_example(&params, Label::Proved, 3, &r).unwrap();
    for (i, rule) in e.theory.rules.iter().enumerate() {
        assert_eq!(rule.id, RuleId(i as u32 + 1));
    }
    assert_eq!(e.rule_texts.len(), e.theory.rules.len());
}

#[test]
fn invalid_params_are_rejected() {
    let r = res();
    let bad = GenParams {
        p_conf: 1.5,
        ..GenParams::default()
    };
    assert!(matches!(
        generate_example(&bad, Label::Proved, 0, &r),
        Err(GenError::InvalidParams(_))
    ));
    let t5 = GenParams {
        rule_types: vec![TemplateKind::T5],
        ..GenParams::default()
    };
    assert!(t5.validate().is_err());
}
