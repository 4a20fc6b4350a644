//! Entity names with case- and separator-insensitive identity.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("empty name")]
    Empty,
    #[error("name {0:?} contains characters outside [a-z0-9_] after canonicalization")]
    InvalidCharacter(String),
}

/// Canonical form of a raw name: trimmed, ASCII-lowercased, with runs of
/// whitespace collapsed into a single underscore.
pub fn canonicalize(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_ascii_lowercase()
}

/// A name as written by the user plus its canonical identifier.
///
/// Equality, ordering and hashing only look at the canonical form, so
/// `"Soft drink"`, `"soft_drink"` and `"SOFT_DRINK"` are the same entity.
#[derive(Debug, Clone)]
pub struct EntityName {
    canonical: String,
    display: String,
}

impl EntityName {
    pub fn new(raw: &str) -> Result<Self, NameError> {
        let canonical = canonicalize(raw);
        if canonical.is_empty() {
            return Err(NameError::Empty);
        }
        if !canonical
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
        {
            return Err(NameError::InvalidCharacter(raw.to_string()));
        }
        Ok(Self {
            canonical,
            display: raw.trim().to_string(),
        })
    }

    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn display(&self) -> &str {
        &self.display
    }
}

impl PartialEq for EntityName {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for EntityName {}

impl Hash for EntityName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state)
    }
}

impl PartialOrd for EntityName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntityName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl Borrow<str> for EntityName {
    fn borrow(&self) -> &str {
        &self.canonical
    }
}

impl fmt::Display for EntityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

impl Serialize for EntityName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical)
    }
}

impl std::str::FromStr for EntityName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}
