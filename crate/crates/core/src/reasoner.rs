//! Backend-independent reasoner contract.
//!
//! Both backends answer the same fourteen methods over a [`KnowledgeBase`]:
//! the thirteen comparison methods used by the navigator plus characteristic
//! lookup. Answers carry an explanation chain each (for example the
//! refrigerator a soft drink is reached through).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kb::Kind;
use crate::name::EntityName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Relational,
    Ontology,
}

impl Backend {
    pub fn id(self) -> &'static str {
        match self {
            Backend::Relational => "relational",
            Backend::Ontology => "ontology",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// What a method takes as input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "shape", content = "kind", rename_all = "snake_case")]
pub enum InputShape {
    None,
    One(Kind),
    Set(Kind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LabelRoomsByObjects,
    RoomClassOf,
    RoomClassesContaining,
    RelatedObjects,
    ObjectsWithUtility,
    ObjectsWithMeaning,
    ProbableLocations,
    PhysicalRoomsOfClass,
    ObjectClassesInPhysicalRoom,
    PhysicalObjectsOfClass,
    ClassOfPhysicalObject,
    AllObjectClasses,
    AllUtilities,
    CharacteristicsOf,
}

impl Method {
    pub const ALL: [Method; 14] = [
        Method::LabelRoomsByObjects,
        Method::RoomClassOf,
        Method::RoomClassesContaining,
        Method::RelatedObjects,
        Method::ObjectsWithUtility,
        Method::ObjectsWithMeaning,
        Method::ProbableLocations,
        Method::PhysicalRoomsOfClass,
        Method::ObjectClassesInPhysicalRoom,
        Method::PhysicalObjectsOfClass,
        Method::ClassOfPhysicalObject,
        Method::AllObjectClasses,
        Method::AllUtilities,
        Method::CharacteristicsOf,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::LabelRoomsByObjects => "label_rooms_by_objects",
            Method::RoomClassOf => "room_class_of",
            Method::RoomClassesContaining => "room_classes_containing",
            Method::RelatedObjects => "related_objects",
            Method::ObjectsWithUtility => "objects_with_utility",
            Method::ObjectsWithMeaning => "objects_with_meaning",
            Method::ProbableLocations => "probable_locations",
            Method::PhysicalRoomsOfClass => "physical_rooms_of_class",
            Method::ObjectClassesInPhysicalRoom => "object_classes_in_physical_room",
            Method::PhysicalObjectsOfClass => "physical_objects_of_class",
            Method::ClassOfPhysicalObject => "class_of_physical_object",
            Method::AllObjectClasses => "all_object_classes",
            Method::AllUtilities => "all_utilities",
            Method::CharacteristicsOf => "characteristics_of",
        }
    }

    pub fn from_id(id: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.id() == id)
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::LabelRoomsByObjects => "Semantic labeling by object",
            Method::RoomClassOf => "Obtain class room from instance room",
            Method::RoomClassesContaining => "Obtain class rooms containing an object",
            Method::RelatedObjects => "Obtain conceptually related objects",
            Method::ObjectsWithUtility => "Objects that serve a specific utility",
            Method::ObjectsWithMeaning => "Objects whose use has a meaning associated",
            Method::ProbableLocations => "Probable location of an object",
            Method::PhysicalRoomsOfClass => "Physical room that fits conceptual room",
            Method::ObjectClassesInPhysicalRoom => "Objects contained in physical room",
            Method::PhysicalObjectsOfClass => "Physical objects that fit with conceptual object",
            Method::ClassOfPhysicalObject => "Conceptual name of a physical object",
            Method::AllObjectClasses => "Obtain all conceptual objects",
            Method::AllUtilities => "Obtain all actions / utilities",
            Method::CharacteristicsOf => "Characteristics of an object",
        }
    }

    pub fn input(self) -> InputShape {
        match self {
            Method::LabelRoomsByObjects => InputShape::Set(Kind::ObjectClass),
            Method::RoomClassOf | Method::ObjectClassesInPhysicalRoom => InputShape::One(Kind::PhysicalRoom),
            Method::RoomClassesContaining
            | Method::RelatedObjects
            | Method::ProbableLocations
            | Method::PhysicalObjectsOfClass
            | Method::CharacteristicsOf => InputShape::One(Kind::ObjectClass),
            Method::ObjectsWithUtility => InputShape::One(Kind::Utility),
            Method::ObjectsWithMeaning => InputShape::One(Kind::Meaning),
            Method::PhysicalRoomsOfClass => InputShape::One(Kind::RoomClass),
            Method::ClassOfPhysicalObject => InputShape::One(Kind::PhysicalObject),
            Method::AllObjectClasses | Method::AllUtilities => InputShape::None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Relation tags used as chains of `related_objects` answers.
pub mod tag {
    pub const USED_WITH: &str = "used_with";
    /// The answer contains the queried object.
    pub const CONTAINER: &str = "container";
    /// The queried object contains the answer.
    pub const CONTAINEE: &str = "containee";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    UnknownEntity,
    WrongKind,
    EmptyInput,
    WrongArity,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::UnknownEntity => "UnknownEntity",
            ErrorKind::WrongKind => "WrongKind",
            ErrorKind::EmptyInput => "EmptyInput",
            ErrorKind::WrongArity => "WrongArity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{kind}: {subject}")]
pub struct ReasonerError {
    pub kind: ErrorKind,
    /// The offending input, or the method id for arity errors.
    pub subject: String,
}

impl ReasonerError {
    pub fn new(kind: ErrorKind, subject: impl Into<String>) -> Self {
        Self {
            kind,
            subject: subject.into(),
        }
    }
}

/// Answers in backend order, each with its explanation chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReasonerResult {
    pub backend: Backend,
    answers: Vec<EntityName>,
    chains: Vec<Vec<EntityName>>,
}

impl ReasonerResult {
    /// Builds a result from `(answer, chain)` pairs. A repeated answer keeps
    /// its first chain.
    pub fn new(backend: Backend, pairs: impl IntoIterator<Item = (EntityName, Vec<EntityName>)>) -> Self {
        let mut seen = BTreeSet::new();
        let (answers, chains) = pairs
            .into_iter()
            .filter(|(answer, _)| seen.insert(answer.clone()))
            .unzip();
        Self {
            backend,
            answers,
            chains,
        }
    }

    pub fn answers(&self) -> &[EntityName] {
        &self.answers
    }

    pub fn chains(&self) -> &[Vec<EntityName>] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityName, &[EntityName])> {
        self.answers.iter().zip(self.chains.iter().map(Vec::as_slice))
    }

    pub fn chain_of(&self, answer: &str) -> Option<&[EntityName]> {
        self.iter()
            .find(|(a, _)| a.canonical() == crate::name::canonicalize(answer))
            .map(|(_, c)| c)
    }

    pub fn answer_set(&self) -> BTreeSet<&str> {
        self.answers.iter().map(EntityName::canonical).collect()
    }

    /// Order-insensitive view: answer -> chain as a set.
    pub fn canonical_form(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        self.iter()
            .map(|(a, c)| (a.canonical(), c.iter().map(EntityName::canonical).collect()))
            .collect()
    }

    /// Stable text of [`Self::canonical_form`], suitable for hashing.
    pub fn canonical_text(&self) -> String {
        self.canonical_form()
            .into_iter()
            .map(|(a, c)| {
                if c.is_empty() {
                    a.to_string()
                } else {
                    format!("{a}<{}>", c.into_iter().collect::<Vec<_>>().join(","))
                }
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// `kitchen (via refrigerator), office`.
    pub fn render(&self) -> String {
        self.iter()
            .map(|(a, c)| {
                if c.is_empty() {
                    a.to_string()
                } else {
                    let via: Vec<&str> = c.iter().map(EntityName::canonical).collect();
                    format!("{a} (via {})", via.join(", "))
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Implemented by both reasoning backends.
pub trait Reasoner: Send + Sync {
    fn backend(&self) -> Backend;

    /// Namespaces `name` belongs to in this backend's view of the knowledge.
    fn kinds_of(&self, name: &EntityName) -> Vec<Kind>;

    fn run_method(&self, method: Method, inputs: &[EntityName]) -> Result<ReasonerResult, ReasonerError>;

    fn label_rooms_by_objects(&self, objects: &[EntityName]) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::LabelRoomsByObjects, objects)
    }

    fn room_class_of(&self, room: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::RoomClassOf, std::slice::from_ref(room))
    }

    fn room_classes_containing(&self, object: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::RoomClassesContaining, std::slice::from_ref(object))
    }

    fn related_objects(&self, object: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::RelatedObjects, std::slice::from_ref(object))
    }

    fn objects_with_utility(&self, utility: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::ObjectsWithUtility, std::slice::from_ref(utility))
    }

    fn objects_with_meaning(&self, meaning: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::ObjectsWithMeaning, std::slice::from_ref(meaning))
    }

    fn probable_locations(&self, object: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::ProbableLocations, std::slice::from_ref(object))
    }

    fn physical_rooms_of_class(&self, room_class: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::PhysicalRoomsOfClass, std::slice::from_ref(room_class))
    }

    fn object_classes_in_physical_room(&self, room: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::ObjectClassesInPhysicalRoom, std::slice::from_ref(room))
    }

    fn physical_objects_of_class(&self, object: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::PhysicalObjectsOfClass, std::slice::from_ref(object))
    }

    fn class_of_physical_object(&self, object: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::ClassOfPhysicalObject, std::slice::from_ref(object))
    }

    fn all_object_classes(&self) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::AllObjectClasses, &[])
    }

    fn all_utilities(&self) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::AllUtilities, &[])
    }

    fn characteristics_of(&self, object: &EntityName) -> Result<ReasonerResult, ReasonerError> {
        self.run_method(Method::CharacteristicsOf, std::slice::from_ref(object))
    }
}

/// Checks arity and namespaces of `inputs` for `method`, returning the
/// inputs deduplicated in first-seen order.
pub fn check_inputs(
    method: Method,
    inputs: &[EntityName],
    kinds_of: impl Fn(&EntityName) -> Vec<Kind>,
) -> Result<Vec<EntityName>, ReasonerError> {
    let required = match method.input() {
        InputShape::None => {
            if !inputs.is_empty() {
                return Err(ReasonerError::new(ErrorKind::WrongArity, method.id()));
            }
            return Ok(Vec::new());
        }
        InputShape::One(kind) => {
            if inputs.len() > 1 {
                return Err(ReasonerError::new(ErrorKind::WrongArity, method.id()));
            }
            kind
        }
        InputShape::Set(kind) => kind,
    };
    if inputs.is_empty() {
        return Err(ReasonerError::new(ErrorKind::EmptyInput, method.id()));
    }
    let mut unique: Vec<EntityName> = Vec::with_capacity(inputs.len());
    for input in inputs {
        let kinds = kinds_of(input);
        if kinds.is_empty() {
            return Err(ReasonerError::new(ErrorKind::UnknownEntity, input.canonical()));
        }
        if !kinds.contains(&required) {
            return Err(ReasonerError::new(ErrorKind::WrongKind, input.canonical()));
        }
        if !unique.contains(input) {
            unique.push(input.clone());
        }
    }
    Ok(unique)
}

/// Ranking rule for room labeling: rooms containing every observed object,
/// or, when no room does, rooms ordered by how many observed objects they
/// contain (descending, ties by name). Chains list the matched objects.
pub fn rank_room_labels(
    observed: usize,
    matches: BTreeMap<EntityName, BTreeSet<EntityName>>,
) -> Vec<(EntityName, Vec<EntityName>)> {
    let full: Vec<_> = matches
        .iter()
        .filter(|(_, objects)| objects.len() == observed)
        .map(|(room, objects)| (room.clone(), objects.iter().cloned().collect()))
        .collect();
    if !full.is_empty() {
        return full;
    }
    let mut partial: Vec<(EntityName, Vec<EntityName>)> = matches
        .into_iter()
        .filter(|(_, objects)| !objects.is_empty())
        .map(|(room, objects)| (room, objects.into_iter().collect()))
        .collect();
    partial.sort_by(|(ra, oa), (rb, ob)| ob.len().cmp(&oa.len()).then_with(|| ra.cmp(rb)));
    partial
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> EntityName {
        EntityName::new(s).unwrap()
    }

    #[test]
    fn method_ids_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_id(m.id()), Some(m));
        }
        assert_eq!(Method::from_id("nope"), None);
    }

    #[test]
    fn result_drops_duplicate_answers() {
        let r = ReasonerResult::new(
            Backend::Relational,
            [(n("a"), vec![]), (n("b"), vec![n("x")]), (n("a"), vec![n("y")])],
        );
        assert_eq!(r.len(), 2);
        assert_eq!(r.chains().len(), r.answers().len());
        assert_eq!(r.chain_of("b"), Some(&[n("x")][..]));
        assert_eq!(r.render(), "a, b (via x)");
    }

    #[test]
    fn input_checks() {
        let kinds = |name: &EntityName| match name.canonical() {
            "chair" => vec![Kind::ObjectClass],
            "cold" => vec![Kind::Characteristic],
            _ => vec![],
        };
        assert_eq!(
            check_inputs(Method::LabelRoomsByObjects, &[], kinds)
                .unwrap_err()
                .kind,
            ErrorKind::EmptyInput
        );
        assert_eq!(
            check_inputs(Method::ObjectsWithMeaning, &[n("cold")], kinds).unwrap_err(),
            ReasonerError::new(ErrorKind::WrongKind, "cold")
        );
        assert_eq!(
            check_inputs(Method::RelatedObjects, &[n("sofa")], kinds).unwrap_err(),
            ReasonerError::new(ErrorKind::UnknownEntity, "sofa")
        );
        assert_eq!(
            check_inputs(Method::AllUtilities, &[n("chair")], kinds)
                .unwrap_err()
                .kind,
            ErrorKind::WrongArity
        );
        assert_eq!(
            check_inputs(Method::LabelRoomsByObjects, &[n("chair"), n("Chair")], kinds).unwrap(),
            vec![n("chair")]
        );
    }

    #[test]
    fn ranking_falls_back_to_match_counts() {
        let mut matches = BTreeMap::new();
        matches.insert(n("office"), [n("computer")].into_iter().collect());
        matches.insert(n("kitchen"), [n("fridge")].into_iter().collect());
        matches.insert(n("den"), [n("computer"), n("tv")].into_iter().collect());
        let ranked = rank_room_labels(3, matches);
        let rooms: Vec<&str> = ranked.iter().map(|(r, _)| r.canonical()).collect();
        assert_eq!(rooms, ["den", "kitchen", "office"]);
    }
}
