//! Semantic knowledge engine for indoor robot navigation.
//!
//! A two-level knowledge base (conceptual room/object/utility hierarchy plus
//! the physical rooms and objects a robot has seen) answered by two
//! interchangeable reasoners: a relational table/plan evaluator and a
//! rule-based backward chainer over a class tree. On top sit a goal planner
//! that turns requests like "something cold" into candidate rooms, a grid
//! world for executing them, and a benchmark harness comparing the backends.

pub mod bench;
pub mod kb;
pub mod name;
pub mod ontology;
pub mod planner;
pub mod reasoner;
pub mod relational;
pub mod symbol;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;
pub mod world;

pub use kb::{build_kb, KnowledgeBase};
pub use name::EntityName;
pub use ontology::OntologyReasoner;
pub use reasoner::{Backend, ErrorKind, Method, Reasoner, ReasonerError, ReasonerResult};
pub use relational::RelationalReasoner;
