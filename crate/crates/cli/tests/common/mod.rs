#![allow(dead_code)]

use semnav_cli::{Engine, Sources};
use semnav_core::kb::Kind;
use semnav_core::{Backend, EntityName, Method, Reasoner, ReasonerError, ReasonerResult, RelationalReasoner};

pub fn engine() -> Engine {
    Engine::new(Sources::default().load_kb().expect("reference kb"))
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Relational answers, except `all_object_classes` loses its first answer.
pub struct Broken(pub RelationalReasoner);

impl Reasoner for Broken {
    fn backend(&self) -> Backend {
        Backend::Ontology
    }

    fn kinds_of(&self, name: &EntityName) -> Vec<Kind> {
        self.0.kinds_of(name)
    }

    fn run_method(&self, method: Method, inputs: &[EntityName]) -> Result<ReasonerResult, ReasonerError> {
        let result = self.0.run_method(method, inputs)?;
        if method != Method::AllObjectClasses {
            return Ok(result);
        }
        let pairs: Vec<_> = result
            .iter()
            .skip(1)
            .map(|(a, c)| (a.clone(), c.to_vec()))
            .collect();
        Ok(ReasonerResult::new(Backend::Ontology, pairs))
    }
}

pub fn text(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).expect("utf-8 output")
}
