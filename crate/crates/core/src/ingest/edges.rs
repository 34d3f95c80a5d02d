use super::ntriples::RawTriple;
use crate::dictionary::{EntityDictionary, EntityId};
use crate::graph::Directedness;

/// Deduplicated, predicate-free edge list with its dictionary.
///
/// Edges are sorted. In undirected mode each pair is stored as `(min, max)`.
#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    pub dictionary: EntityDictionary,
    pub edges: Vec<(EntityId, EntityId)>,
    pub directedness: Directedness,
    /// Self-loops seen and discarded while building.
    pub self_loops_dropped: u64,
}

impl EdgeList {
    pub fn node_count(&self) -> usize {
        self.dictionary.len()
    }

    /// Builds from already interned pairs, normalizing and deduplicating.
    pub fn from_pairs(
        dictionary: EntityDictionary,
        pairs: impl IntoIterator<Item = (EntityId, EntityId)>,
        directedness: Directedness,
    ) -> Self {
        let mut b = EdgeListBuilder::with_dictionary(dictionary, directedness);
        for (s, o) in pairs {
            b.push_ids(s, o);
        }
        b.finish()
    }
}

#[derive(Debug)]
pub struct EdgeListBuilder {
    dictionary: EntityDictionary,
    edges: Vec<(EntityId, EntityId)>,
    directedness: Directedness,
    self_loops: u64,
}

impl EdgeListBuilder {
    pub fn new(directedness: Directedness) -> Self {
        Self::with_dictionary(EntityDictionary::new(), directedness)
    }

    pub fn with_dictionary(dictionary: EntityDictionary, directedness: Directedness) -> Self {
        Self {
            dictionary,
            edges: Vec::new(),
            directedness,
            self_loops: 0,
        }
    }

    pub fn push_names(&mut self, subject: &str, object: &str) {
        let s = self.dictionary.intern(subject);
        let o = self.dictionary.intern(object);
        self.push_ids(s, o);
    }

    /// Predicate is discarded.
    pub fn push_triple(&mut self, triple: &RawTriple) {
        let object = triple.object.to_node_name();
        self.push_names(&triple.subject, &object);
    }

    pub fn push_ids(&mut self, s: EntityId, o: EntityId) {
        if s == o {
            self.self_loops += 1;
            return;
        }
        let pair = match self.directedness {
            Directedness::Directed => (s, o),
            Directedness::Undirected => (s.min(o), s.max(o)),
        };
        self.edges.push(pair);
    }

    pub fn dictionary(&self) -> &EntityDictionary {
        &self.dictionary
    }

    /// Merges another builder's content, interning its names after ours.
    pub fn absorb(&mut self, other: EdgeListBuilder) {
        let remap = self.dictionary.merge(&other.dictionary);
        self.self_loops += other.self_loops;
        self.edges.reserve(other.edges.len());
        for (s, o) in other.edges {
            self.push_ids(remap[s.index()], remap[o.index()]);
        }
    }

    pub fn finish(mut self) -> EdgeList {
        self.edges.sort_unstable();
        self.edges.dedup();
        self.edges.shrink_to_fit();
        EdgeList {
            dictionary: self.dictionary,
            edges: self.edges,
            directedness: self.directedness,
            self_loops_dropped: self.self_loops,
        }
    }
}

pub fn build_edge_list<'a, I>(kept: I, directedness: Directedness) -> EdgeList
where
    I: IntoIterator<Item = &'a RawTriple>,
{
    let mut b = EdgeListBuilder::new(directedness);
    for t in kept {
        b.push_triple(t);
    }
    b.finish()
}
