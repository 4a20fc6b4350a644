use std::collections::HashMap;

/// Interned string id. Ids are assigned in sorted string order, so comparing
/// two ids compares the underlying names.
pub type Sym = u32;

#[derive(Debug, Clone, Default)]
pub struct Interner {
    names: Vec<String>,
    ids: HashMap<String, Sym>,
}

impl Interner {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        names.dedup();
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as Sym))
            .collect();
        Self { names, ids }
    }

    pub fn get(&self, name: &str) -> Option<Sym> {
        self.ids.get(name).copied()
    }

    pub fn resolve(&self, sym: Sym) -> &str {
        &self.names[sym as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_follow_string_order() {
        let interner = Interner::from_names(["office", "kitchen", "living_room", "kitchen"]);
        assert_eq!(interner.len(), 3);
        let k = interner.get("kitchen").unwrap();
        let l = interner.get("living_room").unwrap();
        let o = interner.get("office").unwrap();
        assert!(k < l && l < o);
        assert_eq!(interner.resolve(l), "living_room");
        assert_eq!(interner.get("garage"), None);
    }
}
