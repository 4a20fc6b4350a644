//! Line-based text formats for the conceptual (`.skb`) and physical (`.pkb`)
//! knowledge documents.
//!
//! One statement per line. `#` starts a comment that runs to end of line.

use std::collections::HashSet;
use std::fmt::Write;

use thiserror::Error;

use super::{Kind, RelationKind};
use crate::name::EntityName;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {name} is declared twice")]
    DuplicateDeclaration { line: usize, name: EntityName },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. } | ParseError::DuplicateDeclaration { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Declare {
        kind: Kind,
        name: EntityName,
    },
    Relate {
        relation: RelationKind,
        subject: EntityName,
        object: EntityName,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhysicalStatement {
    Room {
        id: EntityName,
        class: EntityName,
    },
    Object {
        id: EntityName,
        class: EntityName,
        room: EntityName,
    },
}

/// A statement tagged with the 1-based source line it came from.
#[derive(Debug, Clone)]
pub struct Located<T> {
    pub line: usize,
    pub item: T,
}

#[derive(Debug, Clone, Default)]
pub struct ConceptualDocument {
    statements: Vec<Located<Statement>>,
}

#[derive(Debug, Clone, Default)]
pub struct PhysicalDocument {
    statements: Vec<Located<PhysicalStatement>>,
}

// Documents compare by content; source lines are positional metadata.
impl PartialEq for ConceptualDocument {
    fn eq(&self, other: &Self) -> bool {
        self.statements().eq(other.statements())
    }
}

impl PartialEq for PhysicalDocument {
    fn eq(&self, other: &Self) -> bool {
        self.statements().eq(other.statements())
    }
}

impl ConceptualDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn located(&self) -> &[Located<Statement>] {
        &self.statements
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().map(|s| &s.item)
    }

    pub fn declarations(&self) -> impl Iterator<Item = (Kind, &EntityName)> {
        self.statements().filter_map(|s| match s {
            Statement::Declare { kind, name } => Some((*kind, name)),
            Statement::Relate { .. } => None,
        })
    }

    pub fn relations(&self) -> impl Iterator<Item = (RelationKind, &EntityName, &EntityName)> {
        self.statements().filter_map(|s| match s {
            Statement::Relate {
                relation,
                subject,
                object,
            } => Some((*relation, subject, object)),
            Statement::Declare { .. } => None,
        })
    }

    pub fn declare(&mut self, kind: Kind, name: EntityName) -> &mut Self {
        self.push(Statement::Declare { kind, name })
    }

    pub fn relate(&mut self, relation: RelationKind, subject: EntityName, object: EntityName) -> &mut Self {
        self.push(Statement::Relate {
            relation,
            subject,
            object,
        })
    }

    fn push(&mut self, item: Statement) -> &mut Self {
        let line = self.statements.len() + 1;
        self.statements.push(Located { line, item });
        self
    }

    /// Serializes with canonical names, one statement per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for statement in self.statements() {
            match statement {
                Statement::Declare { kind, name } => {
                    let _ = writeln!(out, "{} {}", kind.keyword(), name);
                }
                Statement::Relate {
                    relation,
                    subject,
                    object,
                } => {
                    let _ = writeln!(out, "{} {} {}", relation.keyword(), subject, object);
                }
            }
        }
        out
    }
}

impl PhysicalDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn located(&self) -> &[Located<PhysicalStatement>] {
        &self.statements
    }

    pub fn statements(&self) -> impl Iterator<Item = &PhysicalStatement> {
        self.statements.iter().map(|s| &s.item)
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn room(&mut self, id: EntityName, class: EntityName) -> &mut Self {
        self.push(PhysicalStatement::Room { id, class })
    }

    pub fn object(&mut self, id: EntityName, class: EntityName, room: EntityName) -> &mut Self {
        self.push(PhysicalStatement::Object { id, class, room })
    }

    fn push(&mut self, item: PhysicalStatement) -> &mut Self {
        let line = self.statements.len() + 1;
        self.statements.push(Located { line, item });
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for statement in self.statements() {
            match statement {
                PhysicalStatement::Room { id, class } => {
                    let _ = writeln!(out, "physical_room {id} {class}");
                }
                PhysicalStatement::Object { id, class, room } => {
                    let _ = writeln!(out, "physical_object {id} {class} {room}");
                }
            }
        }
        out
    }
}

/// Splits `text` into `(line_number, tokens)` for every non-blank,
/// non-comment line.
fn tokenized_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn name_at(line: usize, token: &str) -> Result<EntityName, ParseError> {
    EntityName::new(token).map_err(|e| ParseError::Syntax {
        line,
        reason: e.to_string(),
    })
}

fn check_arity(line: usize, keyword: &str, args: &[&str], expected: usize) -> Result<(), ParseError> {
    if args.len() == expected {
        Ok(())
    } else {
        Err(ParseError::Syntax {
            line,
            reason: format!(
                "arity: `{keyword}` takes {expected} argument(s), found {}",
                args.len()
            ),
        })
    }
}

pub fn parse_conceptual_document(text: &str) -> Result<ConceptualDocument, ParseError> {
    let mut doc = ConceptualDocument::new();
    let mut declared: HashSet<(Kind, EntityName)> = HashSet::new();

    for (line, tokens) in tokenized_lines(text) {
        let (keyword, args) = (tokens[0], &tokens[1..]);
        let item = if let Some(kind) = Kind::from_keyword(keyword).filter(|k| k.is_conceptual()) {
            check_arity(line, keyword, args, 1)?;
            let name = name_at(line, args[0])?;
            if !declared.insert((kind, name.clone())) {
                return Err(ParseError::DuplicateDeclaration { line, name });
            }
            Statement::Declare { kind, name }
        } else if let Some(relation) = RelationKind::from_keyword(keyword) {
            check_arity(line, keyword, args, 2)?;
            Statement::Relate {
                relation,
                subject: name_at(line, args[0])?,
                object: name_at(line, args[1])?,
            }
        } else {
            return Err(ParseError::Syntax {
                line,
                reason: format!("unknown statement `{keyword}`"),
            });
        };
        doc.statements.push(Located { line, item });
    }
    Ok(doc)
}

pub fn parse_physical_document(text: &str) -> Result<PhysicalDocument, ParseError> {
    let mut doc = PhysicalDocument::new();
    let mut declared: HashSet<(Kind, EntityName)> = HashSet::new();

    for (line, tokens) in tokenized_lines(text) {
        let (keyword, args) = (tokens[0], &tokens[1..]);
        let (kind, item) = match keyword {
            "physical_room" => {
                check_arity(line, keyword, args, 2)?;
                let item = PhysicalStatement::Room {
                    id: name_at(line, args[0])?,
                    class: name_at(line, args[1])?,
                };
                (Kind::PhysicalRoom, item)
            }
            "physical_object" => {
                check_arity(line, keyword, args, 3)?;
                let item = PhysicalStatement::Object {
                    id: name_at(line, args[0])?,
                    class: name_at(line, args[1])?,
                    room: name_at(line, args[2])?,
                };
                (Kind::PhysicalObject, item)
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    reason: format!("unknown statement `{other}`"),
                })
            }
        };
        let id = match &item {
            PhysicalStatement::Room { id, .. } | PhysicalStatement::Object { id, .. } => id.clone(),
        };
        if !declared.insert((kind, id.clone())) {
            return Err(ParseError::DuplicateDeclaration { line, name: id });
        }
        doc.statements.push(Located { line, item });
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::reference;
    use proptest::prelude::*;

    #[test]
    fn minimal_conceptual_document() {
        let doc = parse_conceptual_document("object_class Computer\nutility Work\nhas_utility Computer Work")
            .unwrap();
        assert_eq!(doc.declarations().count(), 2);
        assert_eq!(doc.relations().count(), 1);
        let (relation, s, o) = doc.relations().next().unwrap();
        assert_eq!(relation, RelationKind::HasUtility);
        assert_eq!(s.canonical(), "computer");
        assert_eq!(o.canonical(), "work");
    }

    #[test]
    fn relation_arity_violation() {
        let err = parse_conceptual_document("has_utility Computer").unwrap_err();
        match err {
            ParseError::Syntax { line, reason } => {
                assert_eq!(line, 1);
                assert!(reason.starts_with("arity"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped_but_counted() {
        let text = "# header\n\nroom_class Kitchen # trailing\n  \nbogus Kitchen\n";
        let err = parse_conceptual_document(text).unwrap_err();
        assert_eq!(err.line(), 5);
        let doc = parse_conceptual_document("# only\nroom_class Kitchen # x\n").unwrap();
        assert_eq!(doc.located()[0].line, 2);
    }

    #[test]
    fn duplicate_declaration() {
        let err = parse_conceptual_document("utility Work\nutility work").unwrap_err();
        assert_eq!(
            err,
            ParseError::DuplicateDeclaration {
                line: 2,
                name: EntityName::new("work").unwrap()
            }
        );
        let err = parse_physical_document("physical_room R1 Office\nphysical_room r1 Kitchen").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateDeclaration { line: 2, .. }));
    }

    #[test]
    fn reference_conceptual_counts() {
        let doc = parse_conceptual_document(reference::CONCEPTUAL).unwrap();
        let count = |k: Kind| doc.declarations().filter(|(kind, _)| *kind == k).count();
        assert_eq!(count(Kind::RoomClass), 3);
        assert_eq!(count(Kind::ObjectClass), 8);
        assert_eq!(count(Kind::Utility), 4);
        assert_eq!(count(Kind::Meaning), 2);
        assert_eq!(count(Kind::Characteristic), 1);

        let rel = |r: RelationKind| doc.relations().filter(|(kind, _, _)| *kind == r).count();
        assert_eq!(rel(RelationKind::RoomContains), 8);
        assert_eq!(rel(RelationKind::ObjectContains), 1);
        assert_eq!(rel(RelationKind::HasUtility), 5);
        assert_eq!(rel(RelationKind::UtilityMeans), 3);
        assert_eq!(rel(RelationKind::UsedWith), 2);
        assert_eq!(rel(RelationKind::HasCharacteristic), 1);
        assert_eq!(doc.relations().count(), 20);
    }

    #[test]
    fn reference_physical_has_five_instances() {
        let doc = parse_physical_document(reference::PHYSICAL).unwrap();
        let rooms = doc
            .statements()
            .filter(|s| matches!(s, PhysicalStatement::Room { .. }))
            .count();
        assert_eq!(rooms, 2);
        assert_eq!(doc.len() - rooms, 3);
    }

    #[test]
    fn empty_physical_document() {
        assert!(parse_physical_document("").unwrap().is_empty());
    }

    #[test]
    fn physical_object_missing_room() {
        let err = parse_physical_document("physical_object Chair1 Chair").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, .. }));
    }

    fn arb_name() -> impl Strategy<Value = EntityName> {
        "[A-Za-z][A-Za-z0-9_]{0,8}".prop_map(|s| EntityName::new(&s).unwrap())
    }

    fn arb_statement() -> impl Strategy<Value = Statement> {
        let kinds = prop_oneof![
            Just(Kind::RoomClass),
            Just(Kind::ObjectClass),
            Just(Kind::Utility),
            Just(Kind::Meaning),
            Just(Kind::Characteristic),
        ];
        let relations = proptest::sample::select(RelationKind::ALL.to_vec());
        prop_oneof![
            (kinds, arb_name()).prop_map(|(kind, name)| Statement::Declare { kind, name }),
            (relations, arb_name(), arb_name()).prop_map(|(relation, subject, object)| {
                Statement::Relate {
                    relation,
                    subject,
                    object,
                }
            }),
        ]
    }

    proptest! {
        #[test]
        fn conceptual_round_trip(statements in proptest::collection::vec(arb_statement(), 0..30)) {
            let mut doc = ConceptualDocument::new();
            let mut seen = HashSet::new();
            for s in statements {
                if let Statement::Declare { kind, name } = &s {
                    if !seen.insert((*kind, name.clone())) {
                        continue;
                    }
                }
                doc.push(s);
            }
            let reparsed = parse_conceptual_document(&doc.to_text()).unwrap();
            prop_assert_eq!(&reparsed, &doc);
            prop_assert_eq!(reparsed.to_text(), doc.to_text());
        }

        #[test]
        fn physical_round_trip(rooms in proptest::collection::btree_set(arb_name(), 0..5),
                               objects in proptest::collection::btree_set(arb_name(), 0..5),
                               class in arb_name()) {
            let mut doc = PhysicalDocument::new();
            for r in &rooms {
                doc.room(r.clone(), class.clone());
            }
            for o in &objects {
                doc.object(o.clone(), class.clone(), rooms.iter().next().cloned().unwrap_or_else(|| class.clone()));
            }
            let reparsed = parse_physical_document(&doc.to_text()).unwrap();
            prop_assert_eq!(reparsed, doc);
        }
    }
}
