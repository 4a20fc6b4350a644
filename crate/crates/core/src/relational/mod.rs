//! Relational backend: the knowledge base materialized as one table per
//! concept plus one join table per many-to-many relation, queried through a
//! fixed plan per reasoner method.

mod plan;
mod table;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use plan::{ExecStats, Operand, Plan, PlanError};
pub use table::{Row, Table, Value};

use crate::kb::{Kind, KnowledgeBase, RelationKind};
use crate::name::EntityName;
use crate::reasoner::{
    check_inputs, rank_room_labels, tag, Backend, ErrorKind, Method, Reasoner, ReasonerError, ReasonerResult,
};
use crate::symbol::{Interner, Sym};

/// Entity tables: `(table, key column, kind)`.
const ENTITY_TABLES: [(&str, Kind); 5] = [
    ("room_class", Kind::RoomClass),
    ("object_class", Kind::ObjectClass),
    ("utility", Kind::Utility),
    ("meaning", Kind::Meaning),
    ("characteristic", Kind::Characteristic),
];

fn join_table_schema(relation: RelationKind) -> (&'static str, [&'static str; 2]) {
    match relation {
        RelationKind::RoomContains => ("room_contains", ["room_class", "object_class"]),
        RelationKind::ObjectContains => ("object_contains", ["container", "containee"]),
        RelationKind::HasUtility => ("has_utility", ["object_class", "utility"]),
        RelationKind::UtilityMeans => ("utility_means", ["utility", "meaning"]),
        RelationKind::UsedWith => ("used_with", ["object_a", "object_b"]),
        RelationKind::HasCharacteristic => ("has_characteristic", ["object_class", "characteristic"]),
    }
}

/// All tables for one knowledge base, sharing a sorted symbol table.
#[derive(Debug, Clone)]
pub struct TableSet {
    interner: Interner,
    tables: BTreeMap<String, Table>,
}

impl TableSet {
    pub fn get(&self, name: &str) -> Option<&Table> {
        self.tables.get(name)
    }

    pub fn tables(&self) -> impl Iterator<Item = &Table> {
        self.tables.values()
    }

    pub fn interner(&self) -> &Interner {
        &self.interner
    }

    pub fn to_csv(&self, table: &str) -> Option<String> {
        self.get(table).map(|t| t.to_csv(&self.interner))
    }

    /// Evaluates `plan` with positional parameters.
    pub fn evaluate(&self, plan: &Plan, params: &[Sym]) -> Result<(Table, ExecStats), PlanError> {
        let mut exec = plan::Executor::new(self, params);
        let table = exec.eval(plan)?;
        Ok((table, exec.stats))
    }
}

pub fn load_tables(kb: &KnowledgeBase) -> TableSet {
    let mut names: Vec<String> = Kind::ALL
        .iter()
        .flat_map(|k| kb.entities(*k))
        .map(|n| n.canonical().to_string())
        .collect();
    names.extend([tag::USED_WITH, tag::CONTAINER, tag::CONTAINEE].map(String::from));
    let interner = Interner::from_names(names);
    let sym = |n: &EntityName| interner.get(n.canonical()).expect("interned");

    let mut tables = BTreeMap::new();
    for (name, kind) in ENTITY_TABLES {
        let mut t = Table::new(name, &["name"], 1);
        for entity in kb.entities(kind) {
            t.insert(&[sym(entity)]);
        }
        tables.insert(name.to_string(), t);
    }

    let mut rooms = Table::new("physical_room", &["id", "room_class"], 1);
    for room in kb.physical_rooms() {
        rooms.insert(&[sym(&room.id), sym(&room.class_of)]);
    }
    tables.insert(rooms.name.clone(), rooms);

    let mut objects = Table::new("physical_object", &["id", "object_class", "physical_room"], 1);
    for object in kb.physical_objects() {
        objects.insert(&[sym(&object.id), sym(&object.class_of), sym(&object.located_in)]);
    }
    tables.insert(objects.name.clone(), objects);

    for relation in RelationKind::ALL {
        let (name, columns) = join_table_schema(relation);
        let mut t = Table::new(name, &columns, 2);
        for (a, b) in kb.relations().get(relation) {
            t.insert(&[sym(a), sym(b)]);
        }
        tables.insert(name.to_string(), t);
    }

    TableSet { interner, tables }
}

/// The fixed plan answering `method`. Parameter 0 is the method input (all
/// inputs for set-valued methods).
pub fn method_plan(method: Method) -> Plan {
    match method {
        Method::LabelRoomsByObjects => Plan::scan("room_contains")
            .select("object_class", Operand::AnyParam)
            .project(&[("room_class", "answer"), ("object_class", "via")])
            .sort(&["answer", "via"]),
        Method::RoomClassOf => Plan::scan("physical_room")
            .select_param("id")
            .project(&[("room_class", "answer")]),
        Method::RoomClassesContaining => Plan::scan("room_contains")
            .select_param("object_class")
            .project(&[("room_class", "answer")])
            .distinct()
            .sort(&["answer"]),
        Method::RelatedObjects => Plan::Union(vec![
            Plan::scan("used_with")
                .select_param("object_a")
                .project(&[("object_b", "answer")])
                .constant("relation", tag::USED_WITH),
            Plan::scan("used_with")
                .select_param("object_b")
                .project(&[("object_a", "answer")])
                .constant("relation", tag::USED_WITH),
            Plan::scan("object_contains")
                .select_param("containee")
                .project(&[("container", "answer")])
                .constant("relation", tag::CONTAINER),
            Plan::scan("object_contains")
                .select_param("container")
                .project(&[("containee", "answer")])
                .constant("relation", tag::CONTAINEE),
        ])
        .sort(&["answer"]),
        Method::ObjectsWithUtility => Plan::scan("has_utility")
            .select_param("utility")
            .project(&[("object_class", "answer")])
            .distinct()
            .sort(&["answer"]),
        Method::ObjectsWithMeaning => Plan::scan("has_utility")
            .join(
                Plan::scan("utility_means").select_param("meaning"),
                "utility",
                "utility",
            )
            .project(&[("object_class", "answer"), ("utility", "via")])
            .sort(&["answer", "via"]),
        Method::ProbableLocations => Plan::Closure {
            seed: Box::new(Plan::param("node", 0)),
            edges: "object_contains",
            from: "containee",
            to: "container",
        }
        .join(Plan::scan("room_contains"), "node", "object_class")
        .project(&[("room_class", "answer"), ("path", "via")])
        .sort(&["answer", "via"]),
        Method::PhysicalRoomsOfClass => Plan::scan("physical_room")
            .select_param("room_class")
            .project(&[("id", "answer")])
            .sort(&["answer"]),
        Method::ObjectClassesInPhysicalRoom => Plan::scan("physical_object")
            .select_param("physical_room")
            .project(&[("object_class", "answer")])
            .distinct()
            .sort(&["answer"]),
        Method::PhysicalObjectsOfClass => Plan::scan("physical_object")
            .select_param("object_class")
            .project(&[("id", "answer")])
            .sort(&["answer"]),
        Method::ClassOfPhysicalObject => Plan::scan("physical_object")
            .select_param("id")
            .project(&[("object_class", "answer")]),
        Method::AllObjectClasses => Plan::scan("object_class")
            .project(&[("name", "answer")])
            .sort(&["answer"]),
        Method::AllUtilities => Plan::scan("utility")
            .project(&[("name", "answer")])
            .sort(&["answer"]),
        Method::CharacteristicsOf => Plan::Closure {
            seed: Box::new(Plan::param("node", 0)),
            edges: "object_contains",
            from: "containee",
            to: "container",
        }
        .join(Plan::scan("has_characteristic"), "node", "object_class")
        .project(&[("characteristic", "answer"), ("path", "via")])
        .sort(&["answer", "via"]),
    }
}

pub struct RelationalReasoner {
    tables: TableSet,
    names: Vec<EntityName>,
    kinds: HashMap<Sym, Vec<Kind>>,
    plans: BTreeMap<Method, Plan>,
}

impl RelationalReasoner {
    pub fn new(kb: &KnowledgeBase) -> Self {
        let tables = load_tables(kb);
        let names = (0..tables.interner.len() as Sym)
            .map(|s| EntityName::new(tables.interner.resolve(s)).expect("canonical name"))
            .collect();

        let mut kinds: HashMap<Sym, Vec<Kind>> = HashMap::new();
        let mut tag_kind = |table: &str, kind: Kind| {
            for row in &tables.tables[table].rows {
                if let Some(s) = row[0].sym() {
                    kinds.entry(s).or_default().push(kind);
                }
            }
        };
        for (table, kind) in ENTITY_TABLES {
            tag_kind(table, kind);
        }
        tag_kind("physical_room", Kind::PhysicalRoom);
        tag_kind("physical_object", Kind::PhysicalObject);

        let plans = Method::ALL.into_iter().map(|m| (m, method_plan(m))).collect();
        Self {
            tables,
            names,
            kinds,
            plans,
        }
    }

    pub fn tables(&self) -> &TableSet {
        &self.tables
    }

    fn name(&self, sym: Sym) -> EntityName {
        self.names[sym as usize].clone()
    }

    fn path_names(&self, path: &[Sym]) -> Vec<EntityName> {
        path.iter().map(|s| self.name(*s)).collect()
    }

    /// Runs the plan for `method` and shapes its rows into answers. Also
    /// returns evaluation counters.
    pub fn run_with_stats(
        &self,
        method: Method,
        inputs: &[EntityName],
    ) -> Result<(ReasonerResult, ExecStats), ReasonerError> {
        let inputs = check_inputs(method, inputs, |n| self.kinds_of(n))?;
        let params: Vec<Sym> = inputs
            .iter()
            .map(|n| {
                self.tables
                    .interner
                    .get(n.canonical())
                    .ok_or_else(|| ReasonerError::new(ErrorKind::UnknownEntity, n.canonical()))
            })
            .collect::<Result<_, _>>()?;

        let (table, stats) = self
            .tables
            .evaluate(&self.plans[&method], &params)
            .expect("predefined plans are valid");
        let answer = table.column("answer").expect("answer column");
        let via = table.column("via");
        let relation = table.column("relation");

        let pairs: Vec<(EntityName, Vec<EntityName>)> = match method {
            Method::LabelRoomsByObjects => {
                let mut matches: BTreeMap<EntityName, BTreeSet<EntityName>> = BTreeMap::new();
                for row in &table.rows {
                    let room = self.name(row[answer].sym().expect("sym"));
                    let object = self.name(row[via.expect("via")].sym().expect("sym"));
                    matches.entry(room).or_default().insert(object);
                }
                rank_room_labels(params.len(), matches)
            }
            Method::RelatedObjects => {
                // One tag per answer: interaction outranks containment.
                let mut tags: BTreeMap<Sym, Sym> = BTreeMap::new();
                let used_with = self.tables.interner.get(tag::USED_WITH);
                for row in &table.rows {
                    let object = row[answer].sym().expect("sym");
                    let t = row[relation.expect("relation")].sym().expect("sym");
                    tags.entry(object)
                        .and_modify(|cur| {
                            if Some(t) == used_with {
                                *cur = t;
                            }
                        })
                        .or_insert(t);
                }
                tags.into_iter()
                    .map(|(o, t)| (self.name(o), vec![self.name(t)]))
                    .collect()
            }
            Method::ObjectsWithMeaning => {
                // Rows are sorted by (answer, via): the first row is the least utility.
                table
                    .rows
                    .iter()
                    .map(|row| {
                        let utility = row[via.expect("via")].sym().expect("sym");
                        (
                            self.name(row[answer].sym().expect("sym")),
                            vec![self.name(utility)],
                        )
                    })
                    .collect()
            }
            Method::ProbableLocations | Method::CharacteristicsOf => {
                let mut best: BTreeMap<Sym, &[Sym]> = BTreeMap::new();
                for row in &table.rows {
                    let target = row[answer].sym().expect("sym");
                    let path = row[via.expect("via")].path().expect("path");
                    best.entry(target)
                        .and_modify(|cur| {
                            if (path.len(), path) < (cur.len(), *cur) {
                                *cur = path;
                            }
                        })
                        .or_insert(path);
                }
                let mut ranked: Vec<(Sym, &[Sym])> = best.into_iter().collect();
                if method == Method::ProbableLocations {
                    ranked.sort_by(|(ra, pa), (rb, pb)| pa.len().cmp(&pb.len()).then(ra.cmp(rb)));
                }
                ranked
                    .into_iter()
                    .map(|(target, path)| (self.name(target), self.path_names(path)))
                    .collect()
            }
            _ => table
                .rows
                .iter()
                .map(|row| (self.name(row[answer].sym().expect("sym")), Vec::new()))
                .collect(),
        };
        Ok((ReasonerResult::new(Backend::Relational, pairs), stats))
    }
}

impl Reasoner for RelationalReasoner {
    fn backend(&self) -> Backend {
        Backend::Relational
    }

    fn kinds_of(&self, name: &EntityName) -> Vec<Kind> {
        self.tables
            .interner
            .get(name.canonical())
            .and_then(|s| self.kinds.get(&s))
            .cloned()
            .unwrap_or_default()
    }

    fn run_method(&self, method: Method, inputs: &[EntityName]) -> Result<ReasonerResult, ReasonerError> {
        self.run_with_stats(method, inputs).map(|(r, _)| r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::reference;

    fn n(s: &str) -> EntityName {
        EntityName::new(s).unwrap()
    }

    fn answers(r: &ReasonerResult) -> Vec<&str> {
        r.answers().iter().map(EntityName::canonical).collect()
    }

    #[test]
    fn reference_tables() {
        let tables = load_tables(&reference::knowledge_base());
        assert_eq!(tables.get("utility_means").unwrap().len(), 3);
        assert_eq!(tables.get("physical_object").unwrap().len(), 3);
        assert_eq!(tables.get("object_class").unwrap().len(), 8);
        assert_eq!(tables.tables().count(), 13);
        assert!(tables.tables().all(Table::is_well_formed));
    }

    #[test]
    fn empty_kb_tables_are_empty() {
        let tables = load_tables(&KnowledgeBase::empty());
        assert!(tables.tables().all(Table::is_empty));
        let r = RelationalReasoner::new(&KnowledgeBase::empty());
        assert!(r.all_utilities().unwrap().is_empty());
        assert!(r.all_object_classes().unwrap().is_empty());
    }

    #[test]
    fn every_plan_references_existing_tables_and_columns() {
        let tables = load_tables(&reference::knowledge_base());
        for method in Method::ALL {
            let cols = method_plan(method).columns(&tables).unwrap();
            assert!(cols.iter().any(|c| c == "answer"), "{method}: {cols:?}");
        }
        let bad = Plan::scan("room_contains").keep("nope");
        assert!(matches!(
            bad.columns(&tables),
            Err(PlanError::UnknownColumn { .. })
        ));
        assert!(matches!(
            Plan::scan("nope").columns(&tables),
            Err(PlanError::UnknownTable(_))
        ));
    }

    #[test]
    fn meaning_via_two_table_join() {
        let r = RelationalReasoner::new(&reference::knowledge_base());
        let funny = r.objects_with_meaning(&n("Funny")).unwrap();
        assert_eq!(answers(&funny), ["computer", "playstation", "television"]);
        assert_eq!(funny.chain_of("television").unwrap(), &[n("watching_television")]);
        assert_eq!(funny.chain_of("computer").unwrap(), &[n("play")]);
    }

    #[test]
    fn location_via_container() {
        let r = RelationalReasoner::new(&reference::knowledge_base());
        let (loc, stats) = r
            .run_with_stats(Method::ProbableLocations, &[n("soft drink")])
            .unwrap();
        assert_eq!(answers(&loc), ["kitchen"]);
        assert_eq!(loc.chain_of("kitchen").unwrap(), &[n("refrigerator")]);
        // depth 1 containment: one productive join plus the empty frontier.
        assert_eq!(stats.closure_iterations, 2);
    }

    #[test]
    fn csv_dump() {
        let tables = load_tables(&reference::knowledge_base());
        assert_eq!(
            tables.to_csv("utility_means").unwrap(),
            "utility,meaning\nplay,funny\nsit,relaxing\nwatching_television,funny\n"
        );
        assert!(tables.to_csv("missing").is_none());
    }

    #[test]
    fn plans_are_pure() {
        let r = RelationalReasoner::new(&reference::knowledge_base());
        let before: Vec<Table> = r.tables().tables().cloned().collect();
        for method in Method::ALL {
            let input: Vec<EntityName> = match method.input() {
                crate::reasoner::InputShape::None => vec![],
                crate::reasoner::InputShape::One(k) | crate::reasoner::InputShape::Set(k) => {
                    let kb = reference::knowledge_base();
                    kb.entities(k).take(1).cloned().collect()
                }
            };
            let a = r.run_method(method, &input);
            let b = r.run_method(method, &input);
            assert_eq!(a, b);
        }
        let after: Vec<Table> = r.tables().tables().cloned().collect();
        assert_eq!(before, after);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn methods_match_the_oracle(seed in proptest::prelude::any::<u64>()) {
            let kb = crate::testkit::random_kb(seed);
            let r = RelationalReasoner::new(&kb);
            for (method, inputs) in crate::testkit::all_cases(&kb, seed) {
                let got = r
                    .run_method(method, &inputs)
                    .map(|res| crate::testkit::flatten(&res))
                    .map_err(|e| e.kind);
                proptest::prop_assert_eq!(got, crate::testkit::oracle(&kb, method, &inputs), "{} {:?}", method, inputs);
            }
        }

        #[test]
        fn closure_stops_within_depth_plus_one(seed in proptest::prelude::any::<u64>()) {
            let kb = crate::testkit::random_kb(seed);
            let r = RelationalReasoner::new(&kb);
            let depth = kb.relations().object_contains.len();
            for object in kb.object_classes() {
                let (_, stats) = r.run_with_stats(Method::ProbableLocations, std::slice::from_ref(object)).unwrap();
                proptest::prop_assert!(stats.closure_iterations <= depth + 1);
            }
        }
    }
}
