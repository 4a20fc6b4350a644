//! Goal planner: turns a semantic request ("work", "soft drink", "cold")
//! into an ordered queue of physical-room destinations by chaining
//! reasoner calls, then hands them out one at a time as the user rejects
//! or accepts them.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kb::{Kind, KnowledgeBase};
use crate::name::EntityName;
use crate::reasoner::{Reasoner, ReasonerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HopKind {
    MeaningToUtility,
    UtilityToObject,
    CharacteristicToObject,
    ObjectToContainer,
    ObjectToRoomClass,
    RoomClassToPhysicalRoom,
    PhysicalObjectToPhysicalRoom,
}

impl HopKind {
    pub fn id(self) -> &'static str {
        match self {
            HopKind::MeaningToUtility => "meaning_to_utility",
            HopKind::UtilityToObject => "utility_to_object",
            HopKind::CharacteristicToObject => "characteristic_to_object",
            HopKind::ObjectToContainer => "object_to_container",
            HopKind::ObjectToRoomClass => "object_to_room_class",
            HopKind::RoomClassToPhysicalRoom => "room_class_to_physical_room",
            HopKind::PhysicalObjectToPhysicalRoom => "physical_object_to_physical_room",
        }
    }
}

/// One chain element: the entity, and the hop that reached it (`None` for
/// the request itself).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub entity: EntityName,
    pub hop: Option<HopKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Chain(pub Vec<Step>);

impl Chain {
    fn start(entity: EntityName) -> Self {
        Chain(vec![Step { entity, hop: None }])
    }

    fn then(&self, hop: HopKind, entity: EntityName) -> Self {
        let mut steps = self.0.clone();
        steps.push(Step {
            entity,
            hop: Some(hop),
        });
        Chain(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn first(&self) -> &EntityName {
        &self.0[0].entity
    }

    pub fn last(&self) -> &EntityName {
        &self.0[self.0.len() - 1].entity
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityName> {
        self.0.iter().map(|s| &s.entity)
    }

    pub fn hops(&self) -> impl Iterator<Item = HopKind> + '_ {
        self.0.iter().filter_map(|s| s.hop)
    }

    /// The object the chain passes through before reaching containers and
    /// rooms, if any.
    pub fn object(&self) -> Option<&EntityName> {
        let i = self.0.iter().position(|s| {
            matches!(
                s.hop,
                Some(HopKind::ObjectToContainer | HopKind::ObjectToRoomClass)
            )
        })?;
        Some(&self.0[i - 1].entity)
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            f.write_str(step.entity.canonical())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Proposal {
    pub destination: EntityName,
    pub chain: Chain,
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unrealizable {
    pub chain: Chain,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Next {
    Proposal(Proposal),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("`{name}` is ambiguous: it names {}", kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "))]
    AmbiguousRequest { name: EntityName, kinds: Vec<Kind> },
    #[error("no proposal with ordinal {0} is open")]
    UnknownOrdinal(usize),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
}

impl PlanError {
    pub fn kind(&self) -> &'static str {
        match self {
            PlanError::UnknownEntity(_) => "UnknownEntity",
            PlanError::AmbiguousRequest { .. } => "AmbiguousRequest",
            PlanError::UnknownOrdinal(_) => "UnknownOrdinal",
            PlanError::Reasoner(_) => "ReasonerError",
        }
    }
}

/// One user's request and its proposal queue.
#[derive(Debug, Clone, Serialize)]
pub struct PlanSession {
    request: EntityName,
    kind: Kind,
    pending: Vec<Proposal>,
    unrealizable: Vec<Unrealizable>,
    #[serde(skip)]
    cursor: usize,
    #[serde(skip)]
    emitted: BTreeSet<usize>,
    #[serde(skip)]
    rejected: BTreeSet<EntityName>,
    #[serde(skip)]
    accepted: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
struct Node {
    entity: EntityName,
    kind: Kind,
    chain: Chain,
}

/// Expands `request` into its full proposal queue.
pub fn resolve(request: &str, kb: &KnowledgeBase, reasoner: &dyn Reasoner) -> Result<PlanSession, PlanError> {
    let name = EntityName::new(request).map_err(|_| PlanError::UnknownEntity(request.to_string()))?;
    let kinds = reasoner.kinds_of(&name);
    let kind = match kinds.as_slice() {
        [] => return Err(PlanError::UnknownEntity(name.canonical().to_string())),
        [kind] => *kind,
        _ => return Err(PlanError::AmbiguousRequest { name, kinds }),
    };

    let mut pending: Vec<Proposal> = Vec::new();
    let mut unrealizable = Vec::new();
    let mut destinations = HashSet::new();
    let mut expanded: HashSet<(EntityName, Kind)> = HashSet::new();
    let mut queue = VecDeque::from([Node {
        entity: name.clone(),
        kind,
        chain: Chain::start(name.clone()),
    }]);

    let mut propose = |destination: EntityName, chain: Chain, pending: &mut Vec<Proposal>| {
        if destinations.insert(destination.clone()) {
            let ordinal = pending.len();
            pending.push(Proposal {
                destination,
                chain,
                ordinal,
            });
        }
    };

    while let Some(node) = queue.pop_front() {
        // Room classes are expanded once per chain so every unrealizable
        // route is reported; everything else once per entity.
        if node.kind != Kind::RoomClass && !expanded.insert((node.entity.clone(), node.kind)) {
            continue;
        }
        let child = |hop, entity: &EntityName, kind| Node {
            entity: entity.clone(),
            kind,
            chain: node.chain.then(hop, entity.clone()),
        };
        match node.kind {
            Kind::Meaning => {
                for (object, via) in reasoner.objects_with_meaning(&node.entity)?.iter() {
                    let utility = &via[0];
                    let chain = node
                        .chain
                        .then(HopKind::MeaningToUtility, utility.clone())
                        .then(HopKind::UtilityToObject, object.clone());
                    queue.push_back(Node {
                        entity: object.clone(),
                        kind: Kind::ObjectClass,
                        chain,
                    });
                }
            }
            Kind::Utility => {
                for object in reasoner.objects_with_utility(&node.entity)?.answers() {
                    queue.push_back(child(HopKind::UtilityToObject, object, Kind::ObjectClass));
                }
            }
            Kind::Characteristic => {
                for object in reasoner.all_object_classes()?.answers() {
                    let chars = reasoner.characteristics_of(object)?;
                    if chars.answer_set().contains(node.entity.canonical()) {
                        queue.push_back(child(HopKind::CharacteristicToObject, object, Kind::ObjectClass));
                    }
                }
            }
            Kind::ObjectClass => {
                for (room, via) in reasoner.probable_locations(&node.entity)?.iter() {
                    let mut chain = node.chain.clone();
                    for container in via {
                        chain = chain.then(HopKind::ObjectToContainer, container.clone());
                    }
                    queue.push_back(Node {
                        entity: room.clone(),
                        kind: Kind::RoomClass,
                        chain: chain.then(HopKind::ObjectToRoomClass, room.clone()),
                    });
                }
            }
            Kind::RoomClass => {
                let rooms = reasoner.physical_rooms_of_class(&node.entity)?;
                if rooms.is_empty() {
                    unrealizable.push(Unrealizable {
                        chain: node.chain.clone(),
                        reason: format!("no physical room of class {}", node.entity),
                    });
                }
                for room in rooms.answers() {
                    let chain = node.chain.then(HopKind::RoomClassToPhysicalRoom, room.clone());
                    propose(room.clone(), chain, &mut pending);
                }
            }
            Kind::PhysicalRoom => propose(node.entity.clone(), node.chain.clone(), &mut pending),
            Kind::PhysicalObject => {
                if let Some(object) = kb.physical_object(node.entity.canonical()) {
                    let room = object.located_in.clone();
                    let chain = node
                        .chain
                        .then(HopKind::PhysicalObjectToPhysicalRoom, room.clone());
                    propose(room, chain, &mut pending);
                }
            }
        }
    }

    Ok(PlanSession {
        request: name,
        kind,
        pending,
        unrealizable,
        cursor: 0,
        emitted: BTreeSet::new(),
        rejected: BTreeSet::new(),
        accepted: BTreeSet::new(),
    })
}

impl PlanSession {
    pub fn request(&self) -> &EntityName {
        &self.request
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Every proposal in queue order, emitted or not.
    pub fn proposals(&self) -> &[Proposal] {
        &self.pending
    }

    pub fn unrealizable(&self) -> &[Unrealizable] {
        &self.unrealizable
    }

    pub fn rejected(&self) -> impl Iterator<Item = &EntityName> {
        self.rejected.iter()
    }

    pub fn next_proposal(&mut self) -> Next {
        while let Some(p) = self.pending.get(self.cursor) {
            self.cursor += 1;
            if !self.rejected.contains(&p.destination) {
                self.emitted.insert(p.ordinal);
                return Next::Proposal(p.clone());
            }
        }
        Next::Exhausted
    }

    /// The proposal `ordinal` if it was emitted and not yet accepted.
    pub fn open(&self, ordinal: usize) -> Result<&Proposal, PlanError> {
        if self.emitted.contains(&ordinal) && !self.accepted.contains(&ordinal) {
            Ok(&self.pending[ordinal])
        } else {
            Err(PlanError::UnknownOrdinal(ordinal))
        }
    }

    /// Excludes the proposal's destination from everything that follows.
    pub fn reject(&mut self, ordinal: usize) -> Result<(), PlanError> {
        let destination = self.open(ordinal)?.destination.clone();
        self.rejected.insert(destination);
        Ok(())
    }

    /// Marks an emitted proposal accepted and returns it.
    pub fn accept(&mut self, ordinal: usize) -> Result<Proposal, PlanError> {
        let proposal = self.open(ordinal)?.clone();
        self.accepted.insert(ordinal);
        Ok(proposal)
    }
}
