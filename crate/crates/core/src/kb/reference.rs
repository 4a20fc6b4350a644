//! The reference household shipped with the crate: two physical rooms, five
//! physical instances, eight object classes and four utilities.

use super::{build_kb, parse_conceptual_document, parse_physical_document, KnowledgeBase};

pub const CONCEPTUAL: &str = include_str!("../../data/reference.skb");
pub const PHYSICAL: &str = include_str!("../../data/reference.pkb");
pub const WORLD: &str = include_str!("../../data/reference.world");
/// One benchmark case per comparison-table method.
pub const REFERENCE_CASES: &str = include_str!("../../data/reference.cases");
/// Expected answer sets for [`REFERENCE_CASES`], as `<method> <inputs|-> => <answers>`.
pub const REFERENCE_GOLDEN: &str = include_str!("../../data/reference.golden");

pub fn knowledge_base() -> KnowledgeBase {
    let conceptual = parse_conceptual_document(CONCEPTUAL).expect("reference conceptual document");
    let physical = parse_physical_document(PHYSICAL).expect("reference physical document");
    build_kb(&conceptual, &physical).expect("reference knowledge base")
}
