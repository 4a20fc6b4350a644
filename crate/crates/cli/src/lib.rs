//! Front end for the navigation engine: single queries, the benchmark
//! suite, an interactive accept/reject navigation loop and a JSON service.

pub mod commands;
pub mod repl;
pub mod server;

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::ValueEnum;
use semnav_core::kb::{build_kb, parse_conceptual_document, parse_physical_document, reference};
use semnav_core::world::{load_world, GridWorld};
use semnav_core::{KnowledgeBase, OntologyReasoner, Reasoner, RelationalReasoner};

pub mod exit {
    pub const OK: i32 = 0;
    /// Configuration, KB or world could not be loaded, or bad usage.
    pub const LOAD: i32 = 1;
    pub const REASONER: i32 = 2;
    /// Backends disagree.
    pub const DIFFER: i32 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Relational,
    Ontology,
    Both,
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendChoice::Relational => "relational",
            BackendChoice::Ontology => "ontology",
            BackendChoice::Both => "both",
        })
    }
}

/// Input files; unset paths fall back to the bundled reference household.
#[derive(Debug, Clone, Default)]
pub struct Sources {
    pub conceptual: Option<PathBuf>,
    pub physical: Option<PathBuf>,
    pub world: Option<PathBuf>,
}

fn read(path: &Option<PathBuf>, fallback: &'static str) -> anyhow::Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(fallback.to_string()),
    }
}

impl Sources {
    pub fn load_kb(&self) -> anyhow::Result<KnowledgeBase> {
        let conceptual = parse_conceptual_document(&read(&self.conceptual, reference::CONCEPTUAL)?)
            .context("conceptual knowledge base")?;
        let physical = parse_physical_document(&read(&self.physical, reference::PHYSICAL)?)
            .context("physical knowledge base")?;
        Ok(build_kb(&conceptual, &physical)?)
    }

    /// The world file, or the reference world when no KB path was given.
    pub fn load_world(&self, kb: &KnowledgeBase) -> anyhow::Result<GridWorld> {
        if self.world.is_none() && (self.conceptual.is_some() || self.physical.is_some()) {
            bail!("--world is required with a custom knowledge base");
        }
        let text = read(&self.world, reference::WORLD)?;
        load_world(&text, kb).context("world")
    }
}

/// Both reasoners over one knowledge base.
#[derive(Clone)]
pub struct Engine {
    pub kb: Arc<KnowledgeBase>,
    pub relational: Arc<RelationalReasoner>,
    pub ontology: Arc<OntologyReasoner>,
}

impl Engine {
    pub fn new(kb: KnowledgeBase) -> Self {
        Self {
            relational: Arc::new(RelationalReasoner::new(&kb)),
            ontology: Arc::new(OntologyReasoner::new(&kb)),
            kb: Arc::new(kb),
        }
    }

    /// A single backend; `Both` is not a single backend.
    pub fn reasoner(&self, choice: BackendChoice) -> Option<&dyn Reasoner> {
        match choice {
            BackendChoice::Relational => Some(self.relational.as_ref()),
            BackendChoice::Ontology => Some(self.ontology.as_ref()),
            BackendChoice::Both => None,
        }
    }

    pub fn both(&self) -> [&dyn Reasoner; 2] {
        [self.relational.as_ref(), self.ontology.as_ref()]
    }
}
