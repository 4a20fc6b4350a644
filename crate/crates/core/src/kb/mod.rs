//! The ontology's domain model: entity kinds, conceptual relations, the
//! physical hierarchy, and the validated [`KnowledgeBase`] both reasoning
//! backends are loaded from.

mod document;
pub mod reference;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use document::{
    parse_conceptual_document, parse_physical_document, ConceptualDocument, Located, ParseError,
    PhysicalDocument, PhysicalStatement, Statement,
};

use crate::name::EntityName;

/// Namespace an entity name is declared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    RoomClass,
    ObjectClass,
    Utility,
    Meaning,
    Characteristic,
    PhysicalRoom,
    PhysicalObject,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::RoomClass,
        Kind::ObjectClass,
        Kind::Utility,
        Kind::Meaning,
        Kind::Characteristic,
        Kind::PhysicalRoom,
        Kind::PhysicalObject,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Kind::RoomClass => "room_class",
            Kind::ObjectClass => "object_class",
            Kind::Utility => "utility",
            Kind::Meaning => "meaning",
            Kind::Characteristic => "characteristic",
            Kind::PhysicalRoom => "physical_room",
            Kind::PhysicalObject => "physical_object",
        }
    }

    pub fn from_keyword(keyword: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.keyword() == keyword)
    }

    pub fn is_conceptual(self) -> bool {
        !matches!(self, Kind::PhysicalRoom | Kind::PhysicalObject)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Binary relations of the conceptual hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    RoomContains,
    ObjectContains,
    HasUtility,
    UtilityMeans,
    UsedWith,
    HasCharacteristic,
}

impl RelationKind {
    pub const ALL: [RelationKind; 6] = [
        RelationKind::RoomContains,
        RelationKind::ObjectContains,
        RelationKind::HasUtility,
        RelationKind::UtilityMeans,
        RelationKind::UsedWith,
        RelationKind::HasCharacteristic,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::RoomContains => "room_contains",
            RelationKind::ObjectContains => "object_contains",
            RelationKind::HasUtility => "has_utility",
            RelationKind::UtilityMeans => "utility_means",
            RelationKind::UsedWith => "used_with",
            RelationKind::HasCharacteristic => "has_characteristic",
        }
    }

    pub fn from_keyword(keyword: &str) -> Option<RelationKind> {
        RelationKind::ALL.into_iter().find(|k| k.keyword() == keyword)
    }

    /// Kinds required of (subject, object).
    pub fn signature(self) -> (Kind, Kind) {
        match self {
            RelationKind::RoomContains => (Kind::RoomClass, Kind::ObjectClass),
            RelationKind::ObjectContains => (Kind::ObjectClass, Kind::ObjectClass),
            RelationKind::HasUtility => (Kind::ObjectClass, Kind::Utility),
            RelationKind::UtilityMeans => (Kind::Utility, Kind::Meaning),
            RelationKind::UsedWith => (Kind::ObjectClass, Kind::ObjectClass),
            RelationKind::HasCharacteristic => (Kind::ObjectClass, Kind::Characteristic),
        }
    }
}

pub type Pair = (EntityName, EntityName);

/// Conceptual relation sets. `used_with` pairs are stored once, smaller
/// name first; readers apply symmetry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptualRelations {
    pub room_contains: BTreeSet<Pair>,
    pub object_contains: BTreeSet<Pair>,
    pub has_utility: BTreeSet<Pair>,
    pub utility_means: BTreeSet<Pair>,
    pub used_with: BTreeSet<Pair>,
    pub has_characteristic: BTreeSet<Pair>,
}

impl ConceptualRelations {
    pub fn get(&self, relation: RelationKind) -> &BTreeSet<Pair> {
        match relation {
            RelationKind::RoomContains => &self.room_contains,
            RelationKind::ObjectContains => &self.object_contains,
            RelationKind::HasUtility => &self.has_utility,
            RelationKind::UtilityMeans => &self.utility_means,
            RelationKind::UsedWith => &self.used_with,
            RelationKind::HasCharacteristic => &self.has_characteristic,
        }
    }

    fn get_mut(&mut self, relation: RelationKind) -> &mut BTreeSet<Pair> {
        match relation {
            RelationKind::RoomContains => &mut self.room_contains,
            RelationKind::ObjectContains => &mut self.object_contains,
            RelationKind::HasUtility => &mut self.has_utility,
            RelationKind::UtilityMeans => &mut self.utility_means,
            RelationKind::UsedWith => &mut self.used_with,
            RelationKind::HasCharacteristic => &mut self.has_characteristic,
        }
    }

    pub fn len(&self) -> usize {
        RelationKind::ALL.iter().map(|r| self.get(*r).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhysicalRoom {
    pub id: EntityName,
    pub class_of: EntityName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhysicalObject {
    pub id: EntityName,
    pub class_of: EntityName,
    pub located_in: EntityName,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("unknown reference to {name} in {site}")]
    UnknownReference { name: EntityName, site: String },
    #[error("containment cycle: {}", join(path))]
    ContainmentCycle { path: Vec<EntityName> },
    #[error("{name} is declared both as {first} and as {second}")]
    CrossNamespaceCollision {
        name: EntityName,
        first: Kind,
        second: Kind,
    },
    #[error("{name} cannot be used with itself")]
    SelfInteraction { name: EntityName },
}

fn join(path: &[EntityName]) -> String {
    path.iter()
        .map(EntityName::canonical)
        .collect::<Vec<_>>()
        .join(" -> ")
}

/// Validated, immutable knowledge base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    entities: BTreeMap<Kind, BTreeSet<EntityName>>,
    relations: ConceptualRelations,
    physical_rooms: BTreeMap<EntityName, PhysicalRoom>,
    physical_objects: BTreeMap<EntityName, PhysicalObject>,
    kinds: HashMap<String, Vec<Kind>>,
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entities(&self, kind: Kind) -> impl Iterator<Item = &EntityName> {
        self.entities.get(&kind).into_iter().flatten()
    }

    pub fn entity_count(&self, kind: Kind) -> usize {
        self.entities.get(&kind).map_or(0, BTreeSet::len)
    }

    pub fn room_classes(&self) -> impl Iterator<Item = &EntityName> {
        self.entities(Kind::RoomClass)
    }

    pub fn object_classes(&self) -> impl Iterator<Item = &EntityName> {
        self.entities(Kind::ObjectClass)
    }

    pub fn utilities(&self) -> impl Iterator<Item = &EntityName> {
        self.entities(Kind::Utility)
    }

    pub fn meanings(&self) -> impl Iterator<Item = &EntityName> {
        self.entities(Kind::Meaning)
    }

    pub fn characteristics(&self) -> impl Iterator<Item = &EntityName> {
        self.entities(Kind::Characteristic)
    }

    pub fn relations(&self) -> &ConceptualRelations {
        &self.relations
    }

    pub fn physical_rooms(&self) -> impl Iterator<Item = &PhysicalRoom> {
        self.physical_rooms.values()
    }

    pub fn physical_objects(&self) -> impl Iterator<Item = &PhysicalObject> {
        self.physical_objects.values()
    }

    pub fn physical_room(&self, id: &str) -> Option<&PhysicalRoom> {
        self.physical_rooms.get(id)
    }

    pub fn physical_object(&self, id: &str) -> Option<&PhysicalObject> {
        self.physical_objects.get(id)
    }

    /// Every namespace `name` is declared in. Empty when undeclared.
    pub fn kinds_of(&self, name: &str) -> &[Kind] {
        let canonical = crate::name::canonicalize(name);
        self.kinds.get(&canonical).map_or(&[], Vec::as_slice)
    }

    pub fn has(&self, kind: Kind, name: &str) -> bool {
        self.kinds_of(name).contains(&kind)
    }

    /// Total number of declared entities across all namespaces.
    pub fn len(&self) -> usize {
        self.entities.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical conceptual document (sorted declarations then relations).
    pub fn to_conceptual_document(&self) -> ConceptualDocument {
        let mut doc = ConceptualDocument::new();
        for kind in Kind::ALL.into_iter().filter(|k| k.is_conceptual()) {
            for name in self.entities(kind) {
                doc.declare(kind, name.clone());
            }
        }
        for relation in RelationKind::ALL {
            for (s, o) in self.relations.get(relation) {
                doc.relate(relation, s.clone(), o.clone());
            }
        }
        doc
    }

    pub fn to_physical_document(&self) -> PhysicalDocument {
        let mut doc = PhysicalDocument::new();
        for room in self.physical_rooms() {
            doc.room(room.id.clone(), room.class_of.clone());
        }
        for object in self.physical_objects() {
            doc.object(
                object.id.clone(),
                object.class_of.clone(),
                object.located_in.clone(),
            );
        }
        doc
    }

    /// Hex SHA-256 over the canonical serialization of both documents.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_conceptual_document().to_text());
        hasher.update(b"\n--\n");
        hasher.update(self.to_physical_document().to_text());
        hex::encode(hasher.finalize())
    }
}

/// Validates both documents against each other and assembles the knowledge base.
pub fn build_kb(
    conceptual: &ConceptualDocument,
    physical: &PhysicalDocument,
) -> Result<KnowledgeBase, BuildError> {
    let mut kb = KnowledgeBase::default();

    // Conceptual kinds share one namespace; physical rooms and objects share another.
    let mut conceptual_owner: HashMap<EntityName, Kind> = HashMap::new();
    for (kind, name) in conceptual.declarations() {
        if let Some(first) = conceptual_owner.insert(name.clone(), kind) {
            if first != kind {
                return Err(BuildError::CrossNamespaceCollision {
                    name: name.clone(),
                    first,
                    second: kind,
                });
            }
        }
        kb.entities.entry(kind).or_default().insert(name.clone());
    }

    let mut physical_owner: HashMap<EntityName, Kind> = HashMap::new();
    for statement in physical.statements() {
        let (id, kind) = match statement {
            PhysicalStatement::Room { id, .. } => (id, Kind::PhysicalRoom),
            PhysicalStatement::Object { id, .. } => (id, Kind::PhysicalObject),
        };
        if let Some(first) = physical_owner.insert(id.clone(), kind) {
            return Err(BuildError::CrossNamespaceCollision {
                name: id.clone(),
                first,
                second: kind,
            });
        }
        kb.entities.entry(kind).or_default().insert(id.clone());
    }

    let require = |name: &EntityName, kind: Kind, site: String| -> Result<(), BuildError> {
        let ok = if kind.is_conceptual() {
            conceptual_owner.get(name) == Some(&kind)
        } else {
            physical_owner.get(name) == Some(&kind)
        };
        if ok {
            Ok(())
        } else {
            Err(BuildError::UnknownReference {
                name: name.clone(),
                site,
            })
        }
    };

    for located in conceptual.located() {
        let Statement::Relate {
            relation,
            subject,
            object,
        } = &located.item
        else {
            continue;
        };
        let site = format!("{} (line {})", relation.keyword(), located.line);
        let (subject_kind, object_kind) = relation.signature();
        require(subject, subject_kind, site.clone())?;
        require(object, object_kind, site)?;

        let pair = if *relation == RelationKind::UsedWith {
            if subject == object {
                return Err(BuildError::SelfInteraction {
                    name: subject.clone(),
                });
            }
            if subject < object {
                (subject.clone(), object.clone())
            } else {
                (object.clone(), subject.clone())
            }
        } else {
            (subject.clone(), object.clone())
        };
        kb.relations.get_mut(*relation).insert(pair);
    }

    for located in physical.located() {
        let site = format!("{} (line {})", kind_keyword(&located.item), located.line);
        match &located.item {
            PhysicalStatement::Room { id, class } => {
                require(class, Kind::RoomClass, site)?;
                kb.physical_rooms.insert(
                    id.clone(),
                    PhysicalRoom {
                        id: id.clone(),
                        class_of: class.clone(),
                    },
                );
            }
            PhysicalStatement::Object { id, class, room } => {
                require(class, Kind::ObjectClass, site.clone())?;
                require(room, Kind::PhysicalRoom, site)?;
                kb.physical_objects.insert(
                    id.clone(),
                    PhysicalObject {
                        id: id.clone(),
                        class_of: class.clone(),
                        located_in: room.clone(),
                    },
                );
            }
        }
    }

    if let Some(path) = find_containment_cycle(&kb.relations.object_contains) {
        return Err(BuildError::ContainmentCycle { path });
    }

    for (kind, names) in &kb.entities {
        for name in names {
            kb.kinds
                .entry(name.canonical().to_string())
                .or_default()
                .push(*kind);
        }
    }
    Ok(kb)
}

fn kind_keyword(statement: &PhysicalStatement) -> &'static str {
    match statement {
        PhysicalStatement::Room { .. } => Kind::PhysicalRoom.keyword(),
        PhysicalStatement::Object { .. } => Kind::PhysicalObject.keyword(),
    }
}

/// Depth-first search for a cycle in container -> containee edges. The
/// returned path starts and ends at the same entity.
fn find_containment_cycle(edges: &BTreeSet<Pair>) -> Option<Vec<EntityName>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }

    let mut adjacency: BTreeMap<&EntityName, Vec<&EntityName>> = BTreeMap::new();
    for (container, containee) in edges {
        adjacency.entry(container).or_default().push(containee);
    }

    fn visit<'a>(
        node: &'a EntityName,
        adjacency: &BTreeMap<&'a EntityName, Vec<&'a EntityName>>,
        marks: &mut HashMap<&'a EntityName, Mark>,
        stack: &mut Vec<&'a EntityName>,
    ) -> Option<Vec<EntityName>> {
        marks.insert(node, Mark::Open);
        stack.push(node);
        for &next in adjacency.get(node).map(Vec::as_slice).unwrap_or(&[]) {
            match marks.get(next) {
                Some(Mark::Open) => {
                    let start = stack.iter().position(|n| *n == next).unwrap_or(0);
                    let mut path: Vec<EntityName> = stack[start..].iter().map(|n| (*n).clone()).collect();
                    path.push(next.clone());
                    return Some(path);
                }
                Some(Mark::Done) => {}
                None => {
                    if let Some(path) = visit(next, adjacency, marks, stack) {
                        return Some(path);
                    }
                }
            }
        }
        stack.pop();
        marks.insert(node, Mark::Done);
        None
    }

    let mut marks = HashMap::new();
    for &node in adjacency.keys() {
        if !marks.contains_key(node) {
            let mut stack = Vec::new();
            if let Some(path) = visit(node, &adjacency, &mut marks, &mut stack) {
                return Some(path);
            }
        }
    }
    None
}
