mod common;

use std::collections::BTreeSet;

use alignforge::alignment::{keys_from_store, AlignmentSet};
use alignforge::analysis::score;
use alignforge::engine::{
    classify_expressibility, owl_triple, Correspondence, Decision, Expressibility, Extensional, Logical, MoveKind, Op,
    Phase, StatementKind, Status,
};
use alignforge::error::Error;
use alignforge::rules::parse_rules;
use alignforge::store::TripleStore;
use alignforge::term::{CorrespondenceTerm, PropertyTerm, Structural, TermKind};
use alignforge::turtle::parse_turtle;
use common::*;

#[test]
fn ten_candidates_in_order() {
    let ws = workspace();
    assert!(ws.warnings.is_empty());
    let expected = [
        "osmo:einecs_listed_material ⊑ emmo-material:material",
        "osmo:materials_relation ⊑ emmo-models:material_relation",
        "viso-am:rigid_object ⊑ emmo-semiotics:sign",
        "viso-am:rigid_object ⊑ emmo-graphical:symbolic",
        "viso-am:mass_site ⊑ emmo-graphical:symbol",
        "viso-am:mie_site ⊑ emmo-graphical:symbol",
        "viso-am:structureless_object ⊑ emmo-graphical:symbol",
        "viso:has_part ⊑ emmo-mereotopology:has_proper_part",
        "vov:involves ⊑ chain(inv(emmo-mereotopology:has_proper_part), emmo-mereotopology:has_proper_part)",
        "osmo:has_aspect_paradigmatic_content ⊑ chain(inv(emmo-mereotopology:has_proper_part), inv(emmo-models:has_model))",
    ];
    let got: Vec<String> = ws.candidates.iter().map(|c| c.to_text(&ws.ctx.prefixes)).collect();
    assert_eq!(got, expected);
    assert!(ws.candidates.iter().all(|c| c.status == Status::Candidate));
}

#[test]
fn candidate_verdicts_before_any_decision() {
    let ws = workspace();
    for id in [1, 2, 4, 5, 6, 7] {
        assert!(ws.check(id).unwrap().extensional.is_consistent(), "candidate {id}");
    }
    let three = ws.check(3).unwrap();
    assert!(three.extensional.is_consistent());
    assert_eq!(three.structural, Structural::Unknown);
    assert_eq!(ws.check(9).unwrap().structural, Structural::Unknown);
}

#[test]
fn curated_moves_are_proposed() {
    let ws = workspace();
    let p = &ws.ctx.prefixes;
    let prop = |s: &str| CorrespondenceTerm::Property(PropertyTerm::parse(s, p).unwrap()).normalized();
    let class = |s: &str| CorrespondenceTerm::Class(p.expand_curie(s).unwrap());

    let relax8 = ws.suggest(8, Phase::Relax).unwrap();
    assert!(
        relax8
            .iter()
            .any(|m| m.r#move.kind == MoveKind::TauGeneralization
                && m.r#move.after == prop("emmo-mereotopology:has_part"))
    );

    let relax9 = ws.suggest(9, Phase::Relax).unwrap();
    let sigma9 = prop("and(vov:involves, subj(osmo:materials_relation), obj(viso:model_object))");
    assert!(relax9.iter().any(|m| m.r#move.kind == MoveKind::SigmaRefinement && m.r#move.after == sigma9));

    let strengthen1 = ws.suggest(1, Phase::Strengthen).unwrap();
    assert!(strengthen1
        .iter()
        .any(|m| m.r#move.kind == MoveKind::SigmaGeneralization && m.r#move.after == class("evmpo:material")));
    assert!(strengthen1.iter().any(|m| m.r#move.kind == MoveKind::Identification));
}

#[test]
fn proposals_respect_direction_and_counterexamples_are_real() {
    let ws = workspace();
    let t = &ws.ctx.taxonomy;
    for c in &ws.candidates {
        for phase in [Phase::Relax, Phase::Strengthen] {
            for p in ws.suggest(c.id, phase).unwrap() {
                let m = &p.r#move;
                let (sub, sup) = match m.kind {
                    MoveKind::TauGeneralization | MoveKind::SigmaGeneralization => (&m.before, &m.after),
                    MoveKind::SigmaRefinement | MoveKind::TauRefinement => (&m.after, &m.before),
                    MoveKind::Identification => continue,
                };
                match (sub, sup) {
                    (CorrespondenceTerm::Class(a), CorrespondenceTerm::Class(b)) => {
                        assert!(t.subsumes(b, a) && !t.classes.equivalent(a, b));
                    }
                    (CorrespondenceTerm::Property(a), CorrespondenceTerm::Property(b)) => {
                        // Extensionally checked on every scenario graph.
                        for pair in &ws.ctx.pairs {
                            for g in [&pair.source, &pair.target] {
                                assert!(g.eval(a, t).is_subset(&g.eval(b, t)));
                            }
                        }
                    }
                    _ => panic!("kind changed"),
                }
                if let Extensional::Counterexample { items } = &p.validity.extensional {
                    let (sigma, tau) = match m.kind {
                        MoveKind::TauGeneralization | MoveKind::TauRefinement => (&c.sigma, &m.after),
                        _ => (&m.after, &c.tau),
                    };
                    let pair = &ws.ctx.pairs[0];
                    for x in items {
                        let node = |s: &str| alignforge::rdf::NodeRef::Iri(ws.ctx.prefixes.expand_curie(s).unwrap());
                        match (sigma, tau) {
                            (CorrespondenceTerm::Property(s), CorrespondenceTerm::Property(r)) => {
                                let e = (node(&x.subject), node(x.object.as_deref().unwrap()));
                                assert!(pair.source.eval(s, t).contains(&e));
                                assert!(!pair.target.eval(r, t).contains(&e));
                            }
                            (CorrespondenceTerm::Class(s), CorrespondenceTerm::Class(r)) => {
                                assert!(pair.source.has_class(&node(&x.subject), s, t));
                                assert!(!pair.target.has_class(&node(&x.subject), r, t));
                            }
                            _ => unreachable!(),
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn golden_replay_reproduces_the_alignment() {
    let start = std::time::Instant::now();
    let ws = golden();
    let elapsed = start.elapsed();
    let (ttl, rules) = ws.artifacts().unwrap();
    let got = parse_turtle(&ttl, &ws.ctx.prefixes).unwrap();
    assert_eq!(got, expected_alignment(&ws.ctx.prefixes));
    let parsed = parse_rules(&rules, &ws.ctx.prefixes).unwrap();
    assert_eq!(parsed.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(), ["corr_9", "corr_10"]);
    assert_eq!(ws.candidate(3).unwrap().status, Status::Discarded);
    assert_eq!(ws.candidate(6).unwrap().merged_into, Some(5));
    assert_eq!(ws.candidate(7).unwrap().merged_into, Some(5));
    assert!(elapsed.as_secs_f64() < 1.0, "{elapsed:?}");
}

#[test]
fn compiled_rule_matches_hand_written_rule() {
    let ws = golden();
    let a = ws.alignment().unwrap();
    let hand = &ws.rules[0];
    let compiled = &a.rules[0];
    assert_eq!(compiled.antecedent.iter().collect::<BTreeSet<_>>(), hand.antecedent.iter().collect::<BTreeSet<_>>());
    assert_eq!(compiled.consequent.len(), hand.consequent.len());
}

#[test]
fn replay_is_deterministic() {
    let a = golden().artifacts().unwrap();
    let b = golden().artifacts().unwrap();
    assert_eq!(a, b);
}

#[test]
fn log_restores_state_after_every_prefix() {
    let full = read("sessions/golden-session.jsonl");
    let lines: Vec<&str> = full.lines().collect();
    for k in 0..=lines.len() {
        let mut live = workspace();
        live.replay(&lines[..k].join("\n")).unwrap();
        let mut restored = workspace();
        restored.replay(&live.log_jsonl()).unwrap();
        assert_eq!(live.candidates, restored.candidates, "after {k} steps");
        assert_eq!(live.artifacts().unwrap(), restored.artifacts().unwrap());
    }
}

#[test]
fn persisted_log_replays_to_the_same_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.jsonl");
    let mut ws = workspace();
    ws.persist_to(&path);
    ws.decide(3, &Decision::Discard { reason: Some("A rigid object need not be a sign".into()) }, "t1").unwrap();
    ws.decide(2, &Decision::Apply { kind: MoveKind::Identification, term: None }, "t2").unwrap();
    assert!(ws.decide(3, &Decision::Accept, "t3").is_err());
    let mut again = workspace();
    again.replay(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(again.candidates, ws.candidates);
    assert_eq!(again.log.len(), 2);
}

#[test]
fn logical_verdicts_agree_with_raw_closure() {
    let full = read("sessions/golden-session.jsonl");
    let mut ws = workspace();
    for line in full.lines() {
        ws.replay(line).unwrap();
        let mut axioms = ws.ctx.bundle.merged();
        for a in ws.accepted() {
            if let Some(t) = owl_triple(a, &ws.ctx.taxonomy) {
                axioms.insert(t);
            }
        }
        let closure = raw_class_closure(&axioms);
        let accepted_ids: BTreeSet<u32> = ws.accepted().iter().map(|c| c.id).collect();
        for c in ws.candidates.iter().filter(|c| !accepted_ids.contains(&c.id)) {
            let (CorrespondenceTerm::Class(s), CorrespondenceTerm::Class(t)) = (&c.sigma, &c.tau) else { continue };
            let r = ws.check(c.id).unwrap();
            let entailed = s == t || closure.contains(&(s.clone(), t.clone()));
            let entailed = match c.op {
                Op::Equivalent => entailed && (s == t || closure.contains(&(t.clone(), s.clone()))),
                _ => entailed,
            };
            assert_eq!(r.logical == Logical::Derivable, entailed, "candidate {}", c.id);
        }
    }
}

#[test]
fn accepted_entries_were_never_trivial() {
    let mut ws = workspace();
    for line in read("sessions/golden-session.jsonl").lines() {
        let record: alignforge::session::LogRecord = serde_json::from_str(line).unwrap();
        if record.action == alignforge::engine::Action::Accept {
            assert!(!ws.check(record.candidate_id).unwrap().is_trivial());
        }
        ws.replay(line).unwrap();
    }
}

#[test]
fn section_five_deduction() {
    let ws = golden();
    let store: TripleStore = ws.alignment().unwrap().owl_store(&ws.ctx.taxonomy);
    let t = ws.ctx.bundle.taxonomy_with(&store).unwrap();
    let i = |s: &str| ws.ctx.prefixes.expand_curie(s).unwrap();
    assert!(t.subsumes(&i("emmo-graphical:symbol"), &i("viso-am:lj_site")));
    assert!(t.subsumes(&i("emmo-graphical:symbolic"), &i("viso-am:rigid_object")));
    assert!(!ws.ctx.taxonomy.subsumes(&i("emmo-graphical:symbol"), &i("viso-am:lj_site")));
}

#[test]
fn expressibility_classes() {
    let ws = golden();
    let t = &ws.ctx.taxonomy;
    assert_eq!(classify_expressibility(ws.candidate(4).unwrap(), t), Expressibility::Owl(StatementKind::SubClassOf));
    assert_eq!(
        classify_expressibility(ws.candidate(1).unwrap(), t),
        Expressibility::Owl(StatementKind::EquivalentClass)
    );
    assert_eq!(classify_expressibility(ws.candidate(9).unwrap(), t), Expressibility::RuleRequired);
    assert_eq!(classify_expressibility(ws.candidate(10).unwrap(), t), Expressibility::RuleRequired);
    let p = &ws.ctx.prefixes;
    for target in ["emmo-mereotopology:has_part", "emmo-models:has_model", "emmo-properties:has_property"] {
        let c = Correspondence::new(
            99,
            CorrespondenceTerm::parse("osmo:has_ec_number", TermKind::Property, p).unwrap(),
            CorrespondenceTerm::parse(target, TermKind::Property, p).unwrap(),
            Op::Subsumed,
            "",
        )
        .unwrap();
        assert!(matches!(classify_expressibility(&c, t), Expressibility::Rejected(_)), "{target}");
    }
}

#[test]
fn serialization_of_partial_sets() {
    let ws = golden();
    let t = &ws.ctx.taxonomy;
    let empty = AlignmentSet::build([], t, vec![], vec![]).unwrap();
    assert!(parse_turtle(&empty.to_turtle(t, &ws.ctx.prefixes), &ws.ctx.prefixes).unwrap().is_empty());
    assert_eq!(empty.rules_text(&ws.ctx.prefixes), "");
    let only9 = AlignmentSet::build([ws.candidate(9).unwrap()], t, vec![], vec![]).unwrap();
    assert!(only9.owl_store(t).is_empty());
    assert_eq!(parse_rules(&only9.rules_text(&ws.ctx.prefixes), &ws.ctx.prefixes).unwrap().len(), 1);
}

#[test]
fn metrics_on_the_golden_alignment() {
    let ws = golden();
    let a = ws.alignment().unwrap();
    let m = score(&a, &a);
    assert_eq!((m.precision, m.recall, m.f_measure), (Some(1.0), Some(1.0), Some(1.0)));
    let from_file = keys_from_store(&expected_alignment(&ws.ctx.prefixes));
    let owl_only = keys_from_store(&a.owl_store(&ws.ctx.taxonomy));
    assert_eq!(from_file, owl_only);
}

#[test]
fn decision_errors() {
    let mut ws = workspace();
    assert!(matches!(ws.decide(42, &Decision::Accept, "t"), Err(Error::UnknownCandidate(42))));
    ws.decide(1, &Decision::Apply { kind: MoveKind::SigmaGeneralization, term: Some("evmpo:material".into()) }, "t")
        .unwrap();
    let relax = Decision::Apply { kind: MoveKind::TauGeneralization, term: Some("owl:Thing".into()) };
    assert!(matches!(ws.decide(1, &relax, "t"), Err(Error::IllegalTransition(_))));
    let bad = Decision::Apply { kind: MoveKind::TauRefinement, term: Some("(".into()) };
    assert!(matches!(ws.decide(8, &bad, "t"), Err(Error::MalformedTerm { .. })));
    let len = ws.log.len();
    assert_eq!(len, 1);

    // Relaxing to the top makes the candidate trivial.
    ws.decide(3, &relax, "t").unwrap();
    assert!(ws.check(3).unwrap().is_trivial());
    assert!(matches!(ws.decide(3, &Decision::Accept, "t"), Err(Error::TrivialAccept(_))));
    assert_eq!(ws.candidate(3).unwrap().status, Status::Relaxed);
}

#[test]
fn accepting_alignment_makes_followers_redundant() {
    let mut ws = workspace();
    ws.decide(
        5,
        &Decision::Apply { kind: MoveKind::SigmaGeneralization, term: Some("viso-am:structureless_object".into()) },
        "t",
    )
    .unwrap();
    accept(&mut ws, 5);
    // mass_site ⊑ symbol now follows from the accepted statement.
    let six = ws.check(6).unwrap();
    assert_eq!(six.logical, Logical::Derivable);
    assert!(six.is_trivial());
    // An exact duplicate is merged instead.
    let seven = ws.check(7).unwrap();
    assert!(!seven.is_trivial());
    accept(&mut ws, 7);
    assert_eq!(ws.candidate(7).unwrap().merged_into, Some(5));
}
