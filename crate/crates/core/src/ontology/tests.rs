use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::kb::reference;
use crate::testkit;

fn n(s: &str) -> EntityName {
    EntityName::new(s).unwrap()
}

fn reference_reasoner() -> OntologyReasoner {
    OntologyReasoner::new(&reference::knowledge_base())
}

fn answers(r: &ReasonerResult) -> Vec<&str> {
    r.answers().iter().map(EntityName::canonical).collect()
}

fn ground(store: &TripleStore, p: Predicate, a: &str, b: &str) -> GroundAtom {
    (p, store.sym(a).unwrap(), store.sym(b).unwrap())
}

#[test]
fn reference_store_facts() {
    let o = reference_reasoner();
    let store = o.store();
    assert!(store.contains("chair1", Predicate::InstanceOf, "chair"));
    assert!(store.contains("refrigerator", Predicate::Contains, "soft_drink"));
    assert!(store.contains("room1", Predicate::InstanceOf, "office"));
    assert!(!store.contains("chair", Predicate::InstanceOf, "chair1"));
    assert_eq!(store.partition(Partition::Conceptual).len(), 20);
    assert_eq!(store.partition(Partition::Physical).len(), 5 + 3);
    assert!(store.classes().is_tree());
    // 6 class nodes plus 18 declared entities.
    assert_eq!(store.classes().len(), 6 + 18);
    assert!(store.dump().lines().any(|l| l == "chair1 located_in room1"));
}

#[test]
fn empty_kb_has_only_the_class_skeleton() {
    let store = load_triples(&KnowledgeBase::empty());
    assert_eq!(store.classes().len(), 6);
    assert_eq!(store.classes().children(store.classes().root()).count(), 5);
    assert_eq!(store.triples().count(), 0);
    let o = OntologyReasoner::from_store(store);
    assert!(o.all_object_classes().unwrap().is_empty());
    assert!(o.all_utilities().unwrap().is_empty());
}

#[test]
fn derived_facts_on_reference_kb() {
    let o = reference_reasoner();
    let s = o.store();
    let mut solver = o.solver(Scope::All);
    for (p, a, b) in [
        (Predicate::LocatedAt, "soft_drink", "kitchen"),
        (Predicate::HasChar, "soft_drink", "cold"),
        (Predicate::ObjectMeans, "playstation", "funny"),
        (Predicate::RoomHolds, "room1", "computer"),
        (Predicate::Related, "computer", "printer"),
    ] {
        assert!(
            solver.prove(ground(s, p, a, b)).unwrap().is_some(),
            "{p}({a}, {b})"
        );
    }
    assert!(solver
        .prove(ground(s, Predicate::LocatedAt, "soft_drink", "office"))
        .unwrap()
        .is_none());
}

#[test]
fn reference_method_answers() {
    let o = reference_reasoner();
    let loc = o.probable_locations(&n("Soft_drink")).unwrap();
    assert_eq!(answers(&loc), ["kitchen"]);
    assert_eq!(loc.chain_of("kitchen").unwrap(), [n("refrigerator")]);

    let cold = o.characteristics_of(&n("soft_drink")).unwrap();
    assert_eq!(answers(&cold), ["cold"]);
    assert_eq!(cold.chain_of("cold").unwrap(), [n("refrigerator")]);

    let funny = o.objects_with_meaning(&n("Funny")).unwrap();
    assert_eq!(answers(&funny), ["computer", "playstation", "television"]);
    assert_eq!(funny.chain_of("television").unwrap(), [n("watching_television")]);

    let related = o.related_objects(&n("Soft_drink")).unwrap();
    assert_eq!(answers(&related), ["refrigerator"]);
    assert_eq!(related.chain_of("refrigerator").unwrap(), [n(tag::CONTAINER)]);

    assert_eq!(
        answers(&o.label_rooms_by_objects(&[n("Computer")]).unwrap()),
        ["office"]
    );
    assert_eq!(answers(&o.room_class_of(&n("Room2")).unwrap()), ["kitchen"]);
    assert_eq!(
        answers(&o.object_classes_in_physical_room(&n("Room1")).unwrap()),
        ["chair", "computer"]
    );
    assert_eq!(
        answers(&o.physical_objects_of_class(&n("Chair")).unwrap()),
        ["chair1", "chair2"]
    );
    assert_eq!(o.all_object_classes().unwrap().len(), 8);
    assert_eq!(o.all_utilities().unwrap().len(), 4);
}

#[test]
fn input_errors_match_contract() {
    let o = reference_reasoner();
    let e = o.probable_locations(&n("Unicorn")).unwrap_err();
    assert_eq!(e.kind, crate::reasoner::ErrorKind::UnknownEntity);
    let e = o.probable_locations(&n("Kitchen")).unwrap_err();
    assert_eq!(e.kind, crate::reasoner::ErrorKind::WrongKind);
    let e = o.label_rooms_by_objects(&[]).unwrap_err();
    assert_eq!(e.kind, crate::reasoner::ErrorKind::EmptyInput);
    assert_eq!(o.kinds_of(&n("room1")), [Kind::PhysicalRoom]);
    assert_eq!(o.kinds_of(&n("chair1")), [Kind::PhysicalObject]);
    assert_eq!(o.kinds_of(&n("cold")), [Kind::Characteristic]);
    assert!(o.kinds_of(&n("thing")).is_empty());
}

#[test]
fn proofs_replay_against_the_store() {
    let o = reference_reasoner();
    let s = o.store();
    let mut solver = o.solver(Scope::All);
    let atom = ground(s, Predicate::LocatedAt, "soft_drink", "kitchen");
    let proof = solver.prove(atom).unwrap().unwrap();
    assert_eq!(proof.rule, Some(RuleId::LocatedVia));
    assert!(proof.replays(s, o.rules(), Scope::All));

    // A proof with a swapped leaf no longer replays.
    let mut forged = (*proof).clone();
    forged.children[0] = std::rc::Rc::new(Proof::clone(&proof.children[1]));
    assert!(!forged.replays(s, o.rules(), Scope::All));
}

#[test]
fn conceptual_methods_never_read_physical_facts() {
    let o = reference_reasoner();
    for method in Method::ALL {
        if OntologyReasoner::scope_for(method) != Scope::Conceptual {
            continue;
        }
        for (m, inputs) in testkit::all_cases(&reference::knowledge_base(), 7) {
            if m != method {
                continue;
            }
            // Even with physical facts in scope, these goals never touch them.
            if let Ok((_, stats)) = o.run_scoped(method, &inputs, Scope::All) {
                assert_eq!(stats.physical_facts_read, 0, "{method} {inputs:?}");
            }
        }
    }
}

#[test]
fn deeper_taxonomy_is_followed() {
    let kb = reference::knowledge_base();
    // object > appliance > cooling; refrigerator moves under cooling.
    let store = load_triples_with_taxonomy(
        &kb,
        &[
            ("appliance", "object"),
            ("cooling", "appliance"),
            ("refrigerator", "cooling"),
        ],
    );
    assert!(store.classes().is_tree());
    let o = OntologyReasoner::from_store(store);
    let all = o.all_object_classes().unwrap();
    assert!(all.answer_set().contains("refrigerator"));
    assert!(all.answer_set().contains("appliance"));
    let loc = o.probable_locations(&n("soft_drink")).unwrap();
    assert_eq!(answers(&loc), ["kitchen"]);
    assert_eq!(o.kinds_of(&n("refrigerator")), [Kind::ObjectClass]);
}

#[test]
fn fully_unbound_derived_goal_is_bounded() {
    let o = reference_reasoner();
    let goal = Atom::new(Predicate::IsA, Term::Var(0), Term::Var(1));
    let err = o.solver(Scope::All).with_bound(3).solve(&goal).unwrap_err();
    assert!(matches!(
        err,
        SolveError::UnboundGoal {
            predicate: Predicate::IsA,
            bound: 3
        }
    ));
    // Stored predicates are indexed and never raise.
    let stored = Atom::new(Predicate::Contains, Term::Var(0), Term::Var(1));
    assert_eq!(
        o.solver(Scope::All).with_bound(0).solve(&stored).unwrap().len(),
        9
    );
}

/// Naive bottom-up evaluation: apply every rule to every fact until nothing
/// new appears.
fn forward_chain(store: &TripleStore, rules: &RuleSet, scope: Scope) -> BTreeSet<GroundAtom> {
    let mut facts: BTreeSet<GroundAtom> = store
        .triples()
        .filter(|t| scope == Scope::All || store.partition(Partition::Conceptual).contains(t))
        .map(|t| (t.predicate, t.subject, t.object))
        .collect();
    let classes = store.classes();
    let mut node = Vec::new();
    for (child, parent) in
        (0..store.interner().len() as Sym).filter_map(|c| classes.parent(c).map(|p| (c, p)))
    {
        node.push((Predicate::SubclassOf, child, parent));
    }
    facts.extend(node);
    loop {
        let mut new = BTreeSet::new();
        for rule in rules.rules() {
            let mut envs = vec![vec![None; rule.var_count()]];
            for atom in &rule.body {
                let mut next = Vec::new();
                for env in &envs {
                    for &(p, a, b) in &facts {
                        if p != atom.predicate {
                            continue;
                        }
                        let mut e: Vec<Option<Sym>> = env.clone();
                        let ok = [(atom.args[0], a), (atom.args[1], b)]
                            .iter()
                            .all(|(t, v)| match t {
                                Term::Const(c) => c == v,
                                Term::Var(x) => match e[*x as usize] {
                                    Some(old) => old == *v,
                                    None => {
                                        e[*x as usize] = Some(*v);
                                        true
                                    }
                                },
                            });
                        if ok {
                            next.push(e);
                        }
                    }
                }
                envs = next;
            }
            for env in envs {
                let val = |t: Term| match t {
                    Term::Const(c) => c,
                    Term::Var(x) => env[x as usize].unwrap(),
                };
                let head = (
                    rule.head.predicate,
                    val(rule.head.args[0]),
                    val(rule.head.args[1]),
                );
                if !facts.contains(&head) {
                    new.insert(head);
                }
            }
        }
        if new.is_empty() {
            return facts;
        }
        facts.extend(new);
    }
}

fn check_against_forward_chaining(kb: &KnowledgeBase) {
    let o = OntologyReasoner::new(kb);
    for scope in [Scope::Conceptual, Scope::All] {
        let expected = forward_chain(o.store(), o.rules(), scope);
        for p in Predicate::DERIVED {
            let goal = Atom::new(p, Term::Var(0), Term::Var(1));
            let got: BTreeSet<GroundAtom> = o
                .solver(scope)
                .with_bound(usize::MAX)
                .solve(&goal)
                .unwrap()
                .into_iter()
                .map(|b| (p, b.get(0).unwrap(), b.get(1).unwrap()))
                .collect();
            let want: BTreeSet<GroundAtom> = expected.iter().copied().filter(|a| a.0 == p).collect();
            assert_eq!(got, want, "{p} in {scope:?}");
        }
    }
}

#[test]
fn backward_chaining_matches_forward_chaining_on_reference_kb() {
    check_against_forward_chaining(&reference::knowledge_base());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn backward_chaining_matches_forward_chaining(seed in any::<u64>()) {
        check_against_forward_chaining(&testkit::random_kb(seed));
    }

    #[test]
    fn minimal_proofs_replay(seed in any::<u64>()) {
        let kb = testkit::random_kb(seed);
        let o = OntologyReasoner::new(&kb);
        let mut solver = o.solver(Scope::All).with_bound(usize::MAX);
        for p in [Predicate::LocatedAt, Predicate::HasChar, Predicate::Related, Predicate::ObjectMeans] {
            let goal = Atom::new(p, Term::Var(0), Term::Var(1));
            for b in solver.solve(&goal).unwrap() {
                let atom = (p, b.get(0).unwrap(), b.get(1).unwrap());
                let proof = solver.prove(atom).unwrap().expect("derived atoms are provable");
                prop_assert!(proof.replays(o.store(), o.rules(), Scope::All));
            }
        }
    }

    #[test]
    fn methods_match_the_oracle(seed in any::<u64>()) {
        let kb = testkit::random_kb(seed);
        let o = OntologyReasoner::new(&kb);
        for (method, inputs) in testkit::all_cases(&kb, seed) {
            let got = o.run_method(method, &inputs).map(|r| testkit::flatten(&r)).map_err(|e| e.kind);
            prop_assert_eq!(got, testkit::oracle(&kb, method, &inputs), "{} {:?}", method, inputs);
        }
    }
}
