//! Rule backend: a class tree rooted at `thing`, property triples split into
//! a conceptual and a physical partition, and goal-directed backward
//! chaining over the navigation rules.

mod rules;
mod solve;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

pub use rules::{Atom, GroundAtom, Predicate, Rule, RuleId, RuleSet, Term, Var};
pub use solve::{Bindings, Proof, Scope, SolveError, SolveStats, Solver};

use crate::kb::{Kind, KnowledgeBase, RelationKind};
use crate::name::EntityName;
use crate::reasoner::{
    check_inputs, rank_room_labels, tag, Backend, Method, Reasoner, ReasonerError, ReasonerResult,
};
use crate::symbol::{Interner, Sym};

/// Root of the class tree.
pub const THING: &str = "thing";
/// First-level classes, in the order the class tree lists them.
pub const FIRST_LEVEL: [&str; 5] = ["characteristic", "meaning", "object", "room", "utility"];

// Class nodes live in their own key space so they never collide with entity
// names (which cannot contain ':').
fn class_key(name: &str) -> String {
    format!(":{name}")
}

fn category_of(kind: Kind) -> Option<&'static str> {
    match kind {
        Kind::RoomClass => Some("room"),
        Kind::ObjectClass => Some("object"),
        Kind::Utility => Some("utility"),
        Kind::Meaning => Some("meaning"),
        Kind::Characteristic => Some("characteristic"),
        Kind::PhysicalRoom | Kind::PhysicalObject => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Conceptual,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Sym,
    pub predicate: Predicate,
    pub object: Sym,
}

/// The is-a tree: every node but the root has one parent.
#[derive(Debug, Clone, Default)]
pub struct ClassTree {
    parent: BTreeMap<Sym, Sym>,
    root: Sym,
}

impl ClassTree {
    pub fn root(&self) -> Sym {
        self.root
    }

    pub fn parent(&self, node: Sym) -> Option<Sym> {
        self.parent.get(&node).copied()
    }

    pub fn children(&self, node: Sym) -> impl Iterator<Item = Sym> + '_ {
        self.parent
            .iter()
            .filter(move |(_, p)| **p == node)
            .map(|(c, _)| *c)
    }

    /// Number of nodes including the root.
    pub fn len(&self) -> usize {
        self.parent.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when every node reaches the root without revisiting a node.
    pub fn is_tree(&self) -> bool {
        self.parent.keys().all(|&start| {
            let mut node = start;
            for _ in 0..=self.parent.len() {
                match self.parent.get(&node) {
                    Some(&p) if p == self.root => return true,
                    Some(&p) => node = p,
                    None => return false,
                }
            }
            false
        })
    }
}

#[derive(Debug, Clone)]
pub struct TripleStore {
    interner: Interner,
    names: Vec<EntityName>,
    classes: ClassTree,
    categories: HashMap<&'static str, Sym>,
    conceptual: Vec<Triple>,
    physical: Vec<Triple>,
    by_subject: HashMap<(Predicate, Sym), Vec<(Sym, Partition)>>,
    by_object: HashMap<(Predicate, Sym), Vec<(Sym, Partition)>>,
    by_predicate: HashMap<Predicate, Vec<(Sym, Sym, Partition)>>,
}

pub fn load_triples(kb: &KnowledgeBase) -> TripleStore {
    load_triples_with_taxonomy(kb, &[])
}

/// Like [`load_triples`], additionally inserting (or re-parenting) class
/// nodes: each `(child, parent)` names classes by canonical name, with the
/// first-level classes and `thing` addressed by their own names.
pub fn load_triples_with_taxonomy(kb: &KnowledgeBase, extra: &[(&str, &str)]) -> TripleStore {
    let is_builtin = |n: &str| n == THING || FIRST_LEVEL.contains(&n);
    let node_key = |n: &str| {
        if is_builtin(n) {
            class_key(n)
        } else {
            n.to_string()
        }
    };

    let mut keys: Vec<String> = Kind::ALL
        .iter()
        .flat_map(|k| kb.entities(*k))
        .map(|n| n.canonical().to_string())
        .collect();
    keys.push(class_key(THING));
    keys.extend(FIRST_LEVEL.iter().map(|c| class_key(c)));
    keys.extend(extra.iter().flat_map(|(c, p)| [node_key(c), node_key(p)]));
    let interner = Interner::from_names(keys);
    let sym = |key: &str| interner.get(key).expect("interned");

    let names = (0..interner.len() as Sym)
        .map(|s| {
            let key = interner.resolve(s);
            EntityName::new(key.trim_start_matches(':')).expect("canonical")
        })
        .collect();

    let root = sym(&class_key(THING));
    let mut classes = ClassTree {
        parent: BTreeMap::new(),
        root,
    };
    let mut categories = HashMap::new();
    for category in FIRST_LEVEL {
        let s = sym(&class_key(category));
        classes.parent.insert(s, root);
        categories.insert(category, s);
    }
    for kind in Kind::ALL {
        if let Some(category) = category_of(kind) {
            for name in kb.entities(kind) {
                classes.parent.insert(sym(name.canonical()), categories[category]);
            }
        }
    }
    for (child, parent) in extra {
        classes
            .parent
            .insert(sym(&node_key(child)), sym(&node_key(parent)));
    }

    let mut store = TripleStore {
        interner,
        names,
        classes,
        categories,
        conceptual: Vec::new(),
        physical: Vec::new(),
        by_subject: HashMap::new(),
        by_object: HashMap::new(),
        by_predicate: HashMap::new(),
    };

    let s = |n: &EntityName| store.interner.get(n.canonical()).expect("interned");
    let mut conceptual = Vec::new();
    for relation in RelationKind::ALL {
        let predicate = match relation {
            RelationKind::RoomContains | RelationKind::ObjectContains => Predicate::Contains,
            RelationKind::HasUtility => Predicate::HasUtility,
            RelationKind::UtilityMeans => Predicate::Means,
            RelationKind::UsedWith => Predicate::UsedWith,
            RelationKind::HasCharacteristic => Predicate::HasCharacteristic,
        };
        for (a, b) in kb.relations().get(relation) {
            conceptual.push(Triple {
                subject: s(a),
                predicate,
                object: s(b),
            });
        }
    }
    let mut physical = Vec::new();
    for room in kb.physical_rooms() {
        physical.push(Triple {
            subject: s(&room.id),
            predicate: Predicate::InstanceOf,
            object: s(&room.class_of),
        });
    }
    for object in kb.physical_objects() {
        physical.push(Triple {
            subject: s(&object.id),
            predicate: Predicate::InstanceOf,
            object: s(&object.class_of),
        });
        physical.push(Triple {
            subject: s(&object.id),
            predicate: Predicate::LocatedIn,
            object: s(&object.located_in),
        });
    }
    conceptual.sort();
    physical.sort();

    let taxonomy: Vec<(Sym, Sym)> = store.classes.parent.iter().map(|(c, p)| (*c, *p)).collect();
    for (child, parent) in taxonomy {
        store.index(child, Predicate::SubclassOf, parent, Partition::Conceptual);
    }
    for t in &conceptual {
        store.index(t.subject, t.predicate, t.object, Partition::Conceptual);
    }
    for t in &physical {
        store.index(t.subject, t.predicate, t.object, Partition::Physical);
    }
    store.conceptual = conceptual;
    store.physical = physical;
    store
}

impl TripleStore {
    fn index(&mut self, subject: Sym, predicate: Predicate, object: Sym, partition: Partition) {
        self.by_subject
            .entry((predicate, subject))
            .or_default()
            .push((object, partition));
        self.by_object
            .entry((predicate, object))
            .or_default()
            .push((subject, partition));
        self.by_predicate
            .entry(predicate)
            .or_default()
            .push((subject, object, partition));
    }

    pub fn interner(&self) -> &Interner {
        &self.interner
    }

    pub fn classes(&self) -> &ClassTree {
        &self.classes
    }

    /// Class node for a first-level category such as `"room"`.
    pub fn category(&self, name: &str) -> Option<Sym> {
        self.categories.get(name).copied()
    }

    /// Symbol of an entity or extra class node by canonical name.
    pub fn sym(&self, name: &str) -> Option<Sym> {
        self.interner.get(name)
    }

    pub fn name(&self, sym: Sym) -> &EntityName {
        &self.names[sym as usize]
    }

    pub fn partition(&self, partition: Partition) -> &[Triple] {
        match partition {
            Partition::Conceptual => &self.conceptual,
            Partition::Physical => &self.physical,
        }
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.conceptual.iter().chain(&self.physical)
    }

    /// Stored facts including class-tree edges.
    pub fn len(&self) -> usize {
        self.conceptual.len() + self.physical.len() + self.classes.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, subject: &str, predicate: Predicate, object: &str) -> bool {
        match (self.sym(subject), self.sym(object)) {
            (Some(s), Some(o)) => self.holds((predicate, s, o), Scope::All),
            _ => false,
        }
    }

    pub(crate) fn holds(&self, atom: GroundAtom, scope: Scope) -> bool {
        let (predicate, s, o) = atom;
        self.by_subject.get(&(predicate, s)).is_some_and(|v| {
            v.iter()
                .any(|(x, p)| *x == o && (scope == Scope::All || *p == Partition::Conceptual))
        })
    }

    pub(crate) fn lookup(&self, predicate: Predicate, args: [Option<Sym>; 2]) -> Vec<(Sym, Sym, Partition)> {
        match args {
            [Some(s), Some(o)] => self
                .by_subject
                .get(&(predicate, s))
                .into_iter()
                .flatten()
                .filter(|(x, _)| *x == o)
                .map(|(x, p)| (s, *x, *p))
                .collect(),
            [Some(s), None] => self
                .by_subject
                .get(&(predicate, s))
                .into_iter()
                .flatten()
                .map(|(x, p)| (s, *x, *p))
                .collect(),
            [None, Some(o)] => self
                .by_object
                .get(&(predicate, o))
                .into_iter()
                .flatten()
                .map(|(x, p)| (*x, o, *p))
                .collect(),
            [None, None] => self.by_predicate.get(&predicate).cloned().unwrap_or_default(),
        }
    }

    /// `subject predicate object` lines, sorted, LF-terminated.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .triples()
            .map(|t| format!("{} {} {}", self.name(t.subject), t.predicate, self.name(t.object)))
            .collect();
        lines.sort();
        let mut out = String::new();
        for line in lines {
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

pub struct OntologyReasoner {
    store: TripleStore,
    rules: RuleSet,
}

impl OntologyReasoner {
    pub fn new(kb: &KnowledgeBase) -> Self {
        Self::from_store(load_triples(kb))
    }

    pub fn from_store(store: TripleStore) -> Self {
        let rules = RuleSet::builtin(
            store.category("room").expect("room class"),
            store.category("object").expect("object class"),
        );
        Self { store, rules }
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn solver(&self, scope: Scope) -> Solver<'_> {
        Solver::new(&self.store, &self.rules, scope)
    }

    fn scope_for(method: Method) -> Scope {
        match method {
            Method::RoomClassOf
            | Method::PhysicalRoomsOfClass
            | Method::ObjectClassesInPhysicalRoom
            | Method::PhysicalObjectsOfClass
            | Method::ClassOfPhysicalObject => Scope::All,
            _ => Scope::Conceptual,
        }
    }

    fn named(&self, syms: impl IntoIterator<Item = Sym>) -> Vec<(EntityName, Vec<EntityName>)> {
        syms.into_iter()
            .map(|s| (self.store.name(s).clone(), Vec::new()))
            .collect()
    }

    /// Answers `method` inside the given scope and reports solver counters.
    pub fn run_scoped(
        &self,
        method: Method,
        inputs: &[EntityName],
        scope: Scope,
    ) -> Result<(ReasonerResult, SolveStats), ReasonerError> {
        use Predicate as P;
        const A: Term = Term::Var(0);

        let inputs = check_inputs(method, inputs, |n| self.kinds_of(n))?;
        let syms: Vec<Sym> = inputs
            .iter()
            .map(|n| self.store.sym(n.canonical()).expect("validated input"))
            .collect();
        let input = syms.first().copied().map(Term::Const);
        let x = || input.expect("one input");
        let category = |c: &str| Term::Const(self.store.category(c).expect("category"));

        let mut solver = self.solver(scope);
        let solve_err = |e: SolveError| -> ReasonerError { unreachable!("method goals are bound: {e}") };
        let values = |solver: &mut Solver<'_>, goal: Atom| solver.values(&goal, 0).map_err(solve_err);

        let pairs = match method {
            Method::LabelRoomsByObjects => {
                let mut matches: BTreeMap<EntityName, std::collections::BTreeSet<EntityName>> =
                    BTreeMap::new();
                for &object in &syms {
                    for room in values(&mut solver, Atom::new(P::RoomContains, A, Term::Const(object)))? {
                        matches
                            .entry(self.store.name(room).clone())
                            .or_default()
                            .insert(self.store.name(object).clone());
                    }
                }
                rank_room_labels(syms.len(), matches)
            }
            Method::RoomClassOf | Method::ClassOfPhysicalObject => {
                self.named(values(&mut solver, Atom::new(P::InstanceOf, x(), A))?)
            }
            Method::RoomClassesContaining => {
                self.named(values(&mut solver, Atom::new(P::RoomContains, A, x()))?)
            }
            Method::ObjectsWithUtility => self.named(values(&mut solver, Atom::new(P::HasUtility, A, x()))?),
            Method::PhysicalRoomsOfClass | Method::PhysicalObjectsOfClass => {
                self.named(values(&mut solver, Atom::new(P::InstanceOf, A, x()))?)
            }
            Method::ObjectClassesInPhysicalRoom => {
                self.named(values(&mut solver, Atom::new(P::RoomHolds, x(), A))?)
            }
            Method::AllObjectClasses => {
                self.named(values(&mut solver, Atom::new(P::IsA, A, category("object")))?)
            }
            Method::AllUtilities => {
                self.named(values(&mut solver, Atom::new(P::IsA, A, category("utility")))?)
            }
            Method::RelatedObjects => {
                let object = syms[0];
                let mut out = Vec::new();
                for other in values(&mut solver, Atom::new(P::Related, x(), A))? {
                    let proof = solver
                        .prove((P::Related, object, other))
                        .map_err(solve_err)?
                        .expect("solved atoms are provable");
                    let relation = match proof.rule {
                        Some(RuleId::RelatedUsedWith | RuleId::RelatedUsedWithReverse) => tag::USED_WITH,
                        Some(RuleId::RelatedContainee) => tag::CONTAINEE,
                        _ => tag::CONTAINER,
                    };
                    out.push((
                        self.store.name(other).clone(),
                        vec![EntityName::new(relation).expect("tag")],
                    ));
                }
                out
            }
            Method::ObjectsWithMeaning => {
                let meaning = syms[0];
                let mut out = Vec::new();
                for object in values(&mut solver, Atom::new(P::ObjectMeans, A, x()))? {
                    let proof = solver
                        .prove((P::ObjectMeans, object, meaning))
                        .map_err(solve_err)?
                        .expect("solved atoms are provable");
                    let utility = proof.children[0].atom.2;
                    out.push((
                        self.store.name(object).clone(),
                        vec![self.store.name(utility).clone()],
                    ));
                }
                out
            }
            Method::ProbableLocations | Method::CharacteristicsOf => {
                let (predicate, via_rule) = if method == Method::ProbableLocations {
                    (P::LocatedAt, RuleId::LocatedVia)
                } else {
                    (P::HasChar, RuleId::CharVia)
                };
                let object = syms[0];
                let mut out = Vec::new();
                for target in values(&mut solver, Atom::new(predicate, x(), A))? {
                    let proof = solver
                        .prove((predicate, object, target))
                        .map_err(solve_err)?
                        .expect("solved atoms are provable");
                    out.push((
                        self.store.name(target).clone(),
                        container_chain(&proof, via_rule, &self.store),
                    ));
                }
                if method == Method::ProbableLocations {
                    out.sort_by(|(ra, ca), (rb, cb)| ca.len().cmp(&cb.len()).then_with(|| ra.cmp(rb)));
                }
                out
            }
        };
        let stats = solver.stats();
        Ok((ReasonerResult::new(Backend::Ontology, pairs), stats))
    }
}

/// Containers traversed by the recursive steps of a location or
/// characteristic proof, nearest first.
fn container_chain(proof: &Proof, via_rule: RuleId, store: &TripleStore) -> Vec<EntityName> {
    let mut chain = Vec::new();
    let mut node = proof;
    while node.rule == Some(via_rule) {
        // body: object_contains(C, O), <same predicate>(C, _)
        chain.push(store.name(node.children[0].atom.1).clone());
        node = &node.children[1];
    }
    chain
}

impl Reasoner for OntologyReasoner {
    fn backend(&self) -> Backend {
        Backend::Ontology
    }

    fn kinds_of(&self, name: &EntityName) -> Vec<Kind> {
        use Predicate as P;
        let Some(sym) = self.store.sym(name.canonical()) else {
            return Vec::new();
        };
        let mut solver = self.solver(Scope::All);
        let ancestors = solver
            .values(&Atom::new(P::IsA, Term::Const(sym), Term::Var(0)), 0)
            .unwrap_or_default();
        let mut kinds = Vec::new();
        for (kind, category) in [
            (Kind::RoomClass, "room"),
            (Kind::ObjectClass, "object"),
            (Kind::Utility, "utility"),
            (Kind::Meaning, "meaning"),
            (Kind::Characteristic, "characteristic"),
        ] {
            if self
                .store
                .category(category)
                .is_some_and(|c| ancestors.contains(&c))
            {
                kinds.push(kind);
            }
        }
        let classes = solver
            .values(&Atom::new(P::InstanceOf, Term::Const(sym), Term::Var(0)), 0)
            .unwrap_or_default();
        for class in classes {
            let class_ancestors = solver
                .values(&Atom::new(P::IsA, Term::Const(class), Term::Var(0)), 0)
                .unwrap_or_default();
            for (kind, category) in [(Kind::PhysicalRoom, "room"), (Kind::PhysicalObject, "object")] {
                if self
                    .store
                    .category(category)
                    .is_some_and(|c| class_ancestors.contains(&c))
                    && !kinds.contains(&kind)
                {
                    kinds.push(kind);
                }
            }
        }
        kinds
    }

    fn run_method(&self, method: Method, inputs: &[EntityName]) -> Result<ReasonerResult, ReasonerError> {
        self.run_scoped(method, inputs, Self::scope_for(method))
            .map(|(r, _)| r)
    }
}

#[cfg(test)]
mod tests;
