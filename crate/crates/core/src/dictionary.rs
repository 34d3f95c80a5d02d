//! Interned entity identities.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Dense integer identity of a graph node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl EntityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<u32> for EntityId {
    fn from(v: u32) -> Self {
        EntityId(v)
    }
}

/// Bidirectional name <-> id mapping. Ids are assigned in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct EntityDictionary {
    names: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, EntityId>,
}

impl EntityDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            names: Vec::with_capacity(n),
            ids: HashMap::with_capacity(n),
        }
    }

    /// Get-or-insert.
    pub fn intern(&mut self, name: &str) -> EntityId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = EntityId(u32::try_from(self.names.len()).expect("more than u32::MAX entities"));
        let name: Arc<str> = Arc::from(name);
        self.names.push(name.clone());
        self.ids.insert(name, id);
        id
    }

    pub fn get(&self, name: &str) -> Option<EntityId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: EntityId) -> Option<&str> {
        self.names.get(id.index()).map(|s| &**s)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.names.iter().map(|s| &**s)
    }

    /// Interns every name of `other` in its id order and returns the remap
    /// table `other id -> self id`.
    pub fn merge(&mut self, other: &EntityDictionary) -> Vec<EntityId> {
        other.names().map(|n| self.intern(n)).collect()
    }
}

impl FromIterator<String> for EntityDictionary {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        let mut d = EntityDictionary::new();
        for n in iter {
            d.intern(&n);
        }
        d
    }
}
