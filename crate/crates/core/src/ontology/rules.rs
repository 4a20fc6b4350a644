//! Predicates, goals and the built-in rule set.

use std::fmt;

use crate::symbol::Sym;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    // Stored facts.
    Contains,
    HasUtility,
    Means,
    UsedWith,
    HasCharacteristic,
    InstanceOf,
    LocatedIn,
    SubclassOf,
    // Derived.
    IsA,
    RoomContains,
    ObjectContains,
    LocatedAt,
    HasChar,
    ObjectMeans,
    Related,
    RoomHolds,
}

impl Predicate {
    pub const STORED: [Predicate; 8] = [
        Predicate::Contains,
        Predicate::HasUtility,
        Predicate::Means,
        Predicate::UsedWith,
        Predicate::HasCharacteristic,
        Predicate::InstanceOf,
        Predicate::LocatedIn,
        Predicate::SubclassOf,
    ];

    pub const DERIVED: [Predicate; 8] = [
        Predicate::IsA,
        Predicate::RoomContains,
        Predicate::ObjectContains,
        Predicate::LocatedAt,
        Predicate::HasChar,
        Predicate::ObjectMeans,
        Predicate::Related,
        Predicate::RoomHolds,
    ];

    pub fn is_stored(self) -> bool {
        Self::STORED.contains(&self)
    }

    /// Class-tree bookkeeping; left out of proof size and ordering.
    pub fn is_taxonomy(self) -> bool {
        matches!(self, Predicate::SubclassOf | Predicate::IsA)
    }

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Contains => "contains",
            Predicate::HasUtility => "has_utility",
            Predicate::Means => "means",
            Predicate::UsedWith => "used_with",
            Predicate::HasCharacteristic => "has_characteristic",
            Predicate::InstanceOf => "instance_of",
            Predicate::LocatedIn => "located_in",
            Predicate::SubclassOf => "subclass_of",
            Predicate::IsA => "is_a",
            Predicate::RoomContains => "room_contains",
            Predicate::ObjectContains => "object_contains",
            Predicate::LocatedAt => "located_at",
            Predicate::HasChar => "has_char",
            Predicate::ObjectMeans => "object_means",
            Predicate::Related => "related",
            Predicate::RoomHolds => "room_holds",
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type Var = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(Sym),
}

/// A binary goal such as `located_at(soft_drink, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: Predicate,
    pub args: [Term; 2],
}

impl Atom {
    pub fn new(predicate: Predicate, a: Term, b: Term) -> Self {
        Self {
            predicate,
            args: [a, b],
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        })
    }
}

pub type GroundAtom = (Predicate, Sym, Sym);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    IsADirect,
    IsATransitive,
    RoomContains,
    ObjectContains,
    LocatedDirect,
    LocatedVia,
    CharAsserted,
    CharVia,
    ObjectMeans,
    RelatedUsedWith,
    RelatedUsedWithReverse,
    RelatedContainee,
    RelatedContainer,
    RoomHolds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Rule {
    /// Every head variable occurs in the body.
    pub fn is_range_restricted(&self) -> bool {
        self.head
            .vars()
            .all(|v| self.body.iter().any(|atom| atom.vars().any(|b| b == v)))
    }

    pub fn var_count(&self) -> usize {
        std::iter::once(&self.head)
            .chain(&self.body)
            .flat_map(Atom::vars)
            .map(|v| v as usize + 1)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    /// The navigation rules. `room` and `object` are the first-level class
    /// nodes used as type guards.
    pub fn builtin(room: Sym, object: Sym) -> Self {
        use Predicate as P;
        const X: Term = Term::Var(0);
        const Y: Term = Term::Var(1);
        const Z: Term = Term::Var(2);
        let room = Term::Const(room);
        let object = Term::Const(object);
        let rule = |id, head, body: Vec<Atom>| Rule { id, head, body };
        let at = Atom::new;

        let rules = vec![
            rule(RuleId::IsADirect, at(P::IsA, X, Y), vec![at(P::SubclassOf, X, Y)]),
            rule(
                RuleId::IsATransitive,
                at(P::IsA, X, Y),
                vec![at(P::SubclassOf, X, Z), at(P::IsA, Z, Y)],
            ),
            rule(
                RuleId::RoomContains,
                at(P::RoomContains, X, Y),
                vec![at(P::Contains, X, Y), at(P::IsA, X, room)],
            ),
            rule(
                RuleId::ObjectContains,
                at(P::ObjectContains, X, Y),
                vec![at(P::Contains, X, Y), at(P::IsA, X, object)],
            ),
            // located_at(O, R)
            rule(
                RuleId::LocatedDirect,
                at(P::LocatedAt, X, Y),
                vec![at(P::RoomContains, Y, X)],
            ),
            rule(
                RuleId::LocatedVia,
                at(P::LocatedAt, X, Y),
                vec![at(P::ObjectContains, Z, X), at(P::LocatedAt, Z, Y)],
            ),
            // has_char(O, C)
            rule(
                RuleId::CharAsserted,
                at(P::HasChar, X, Y),
                vec![at(P::HasCharacteristic, X, Y)],
            ),
            rule(
                RuleId::CharVia,
                at(P::HasChar, X, Y),
                vec![at(P::ObjectContains, Z, X), at(P::HasChar, Z, Y)],
            ),
            // object_means(O, M)
            rule(
                RuleId::ObjectMeans,
                at(P::ObjectMeans, X, Y),
                vec![at(P::HasUtility, X, Z), at(P::Means, Z, Y)],
            ),
            rule(
                RuleId::RelatedUsedWith,
                at(P::Related, X, Y),
                vec![at(P::UsedWith, X, Y)],
            ),
            rule(
                RuleId::RelatedUsedWithReverse,
                at(P::Related, X, Y),
                vec![at(P::UsedWith, Y, X)],
            ),
            rule(
                RuleId::RelatedContainee,
                at(P::Related, X, Y),
                vec![at(P::ObjectContains, X, Y)],
            ),
            rule(
                RuleId::RelatedContainer,
                at(P::Related, X, Y),
                vec![at(P::ObjectContains, Y, X)],
            ),
            // room_holds(Room, Class)
            rule(
                RuleId::RoomHolds,
                at(P::RoomHolds, X, Y),
                vec![at(P::LocatedIn, Z, X), at(P::InstanceOf, Z, Y)],
            ),
        ];
        Self { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn for_predicate(&self, predicate: Predicate) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.head.predicate == predicate)
    }
}
