//! Immutable CSR knowledge graph.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dictionary::EntityId;
use crate::error::{Error, Result};
use crate::ingest::EdgeList;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Directedness {
    Directed,
    #[default]
    Undirected,
}

impl fmt::Display for Directedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Directedness::Directed => "directed",
            Directedness::Undirected => "undirected",
        })
    }
}

/// Per-query set of edges to ignore. Undirected pairs are stored as (min, max).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeExclusion {
    directedness: Directedness,
    pairs: Vec<(EntityId, EntityId)>,
}

impl EdgeExclusion {
    pub fn new(directedness: Directedness) -> Self {
        Self {
            directedness,
            pairs: Vec::new(),
        }
    }

    pub fn none() -> Self {
        Self::new(Directedness::Undirected)
    }

    pub fn single(s: EntityId, o: EntityId, directedness: Directedness) -> Self {
        let mut e = Self::new(directedness);
        e.insert(s, o);
        e
    }

    fn normalize(&self, s: EntityId, o: EntityId) -> (EntityId, EntityId) {
        match self.directedness {
            Directedness::Directed => (s, o),
            Directedness::Undirected => (s.min(o), s.max(o)),
        }
    }

    pub fn insert(&mut self, s: EntityId, o: EntityId) {
        let p = self.normalize(s, o);
        if !self.pairs.contains(&p) {
            self.pairs.push(p);
        }
    }

    #[inline]
    pub fn contains(&self, s: EntityId, o: EntityId) -> bool {
        !self.pairs.is_empty() && self.pairs.contains(&self.normalize(s, o))
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(EntityId, EntityId)] {
        &self.pairs
    }

    pub fn directedness(&self) -> Directedness {
        self.directedness
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub min: u32,
    pub median: f64,
    pub max: u32,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub directedness: Directedness,
    pub node_count: u64,
    pub edge_count: u64,
    pub degree: DegreeSummary,
    /// Weakly connected components; isolated nodes count individually.
    pub connected_components: u64,
}

/// Compressed adjacency. In undirected mode `out` holds the symmetric lists and
/// `inc` is empty; in directed mode `out`/`inc` hold out- and in-lists.
#[derive(Clone, PartialEq)]
pub struct KnowledgeGraph {
    directedness: Directedness,
    out: Csr,
    inc: Csr,
    degree: Vec<u32>,
    /// ln k(v), or 0 for isolated nodes (never intermediates).
    log_degree: Vec<f64>,
    edge_count: usize,
}

#[derive(Clone, Default, PartialEq, Eq)]
pub(crate) struct Csr {
    pub(crate) offsets: Vec<u64>,
    pub(crate) targets: Vec<u32>,
}

impl Csr {
    fn empty(n: usize) -> Self {
        Csr {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    #[inline]
    fn row(&self, v: usize) -> &[u32] {
        let lo = self.offsets[v] as usize;
        let hi = self.offsets[v + 1] as usize;
        &self.targets[lo..hi]
    }

    fn len(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    /// Counting-sort construction; rows sorted and deduplicated.
    fn from_pairs(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> Self {
        let mut counts = vec![0u64; n + 1];
        for (s, _) in pairs.clone() {
            counts[s as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut targets = vec![0u32; counts[n] as usize];
        for (s, o) in pairs {
            let slot = &mut cursor[s as usize];
            targets[*slot as usize] = o;
            *slot += 1;
        }
        // sort + dedup each row, compacting in place
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u64);
        let mut write = 0usize;
        for v in 0..n {
            let (lo, hi) = (counts[v] as usize, counts[v + 1] as usize);
            targets[lo..hi].sort_unstable();
            let mut last = None;
            for i in lo..hi {
                let t = targets[i];
                if last != Some(t) {
                    targets[write] = t;
                    write += 1;
                    last = Some(t);
                }
            }
            offsets.push(write as u64);
        }
        targets.truncate(write);
        targets.shrink_to_fit();
        Csr { offsets, targets }
    }
}

impl fmt::Debug for KnowledgeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KnowledgeGraph")
            .field("directedness", &self.directedness)
            .field("node_count", &self.node_count())
            .field("edge_count", &self.edge_count)
            .finish()
    }
}

impl KnowledgeGraph {
    /// Builds from raw id pairs. Duplicates and self-loops are discarded;
    /// in undirected mode reversed pairs conflate.
    pub fn from_edges(
        node_count: usize,
        edges: &[(EntityId, EntityId)],
        directedness: Directedness,
    ) -> Result<Self> {
        if node_count > u32::MAX as usize {
            return Err(Error::validation("node count exceeds u32 id space"));
        }
        for &(s, o) in edges {
            for id in [s, o] {
                if id.index() >= node_count {
                    return Err(Error::OutOfRange { id: id.0, node_count });
                }
            }
        }
        let arcs = edges.iter().filter(|(s, o)| s != o).map(|&(s, o)| (s.0, o.0));
        let graph = match directedness {
            Directedness::Undirected => {
                let sym = arcs.clone().chain(arcs.map(|(s, o)| (o, s)));
                let out = Csr::from_pairs(node_count, sym);
                Self::from_csr(directedness, out, Csr::default())
            }
            Directedness::Directed => {
                let out = Csr::from_pairs(node_count, arcs);
                let inc = transpose(&out, node_count);
                Self::from_csr(directedness, out, inc)
            }
        };
        Ok(graph)
    }

    pub(crate) fn from_csr(directedness: Directedness, out: Csr, inc: Csr) -> Self {
        let n = out.offsets.len().saturating_sub(1);
        let (degree, edge_count) = match directedness {
            Directedness::Undirected => {
                let degree: Vec<u32> = (0..n).map(|v| out.len(v) as u32).collect();
                (degree, out.targets.len() / 2)
            }
            Directedness::Directed => {
                let degree: Vec<u32> = (0..n).map(|v| (out.len(v) + inc.len(v)) as u32).collect();
                (degree, out.targets.len())
            }
        };
        let log_degree = degree.iter().map(|&k| if k == 0 { 0.0 } else { (k as f64).ln() }).collect();
        KnowledgeGraph {
            directedness,
            out,
            inc,
            degree,
            log_degree,
            edge_count,
        }
    }

    /// Rebuilds a directed graph from an already-built out-CSR.
    pub(crate) fn from_out_csr(out: Csr, directedness: Directedness) -> Self {
        match directedness {
            Directedness::Undirected => Self::from_csr(directedness, out, Csr::default()),
            Directedness::Directed => {
                let n = out.offsets.len().saturating_sub(1);
                let inc = transpose(&out, n);
                Self::from_csr(directedness, out, inc)
            }
        }
    }

    pub(crate) fn out_csr(&self) -> &Csr {
        &self.out
    }

    pub fn empty(directedness: Directedness) -> Self {
        let inc = match directedness {
            Directedness::Directed => Csr::empty(0),
            Directedness::Undirected => Csr::default(),
        };
        Self::from_csr(directedness, Csr::empty(0), inc)
    }

    pub fn directedness(&self) -> Directedness {
        self.directedness
    }

    pub fn node_count(&self) -> usize {
        self.degree.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    fn check(&self, v: EntityId) -> Result<()> {
        if v.index() < self.node_count() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                id: v.0,
                node_count: self.node_count(),
            })
        }
    }

    pub fn check_exclusion(&self, exclusion: &EdgeExclusion) -> Result<()> {
        if !exclusion.is_empty() && exclusion.directedness() != self.directedness {
            return Err(Error::validation(format!(
                "exclusion built for a {} graph used on a {} graph",
                exclusion.directedness(),
                self.directedness
            )));
        }
        Ok(())
    }

    /// k(v): statements v participates in (in + out in directed mode).
    pub fn degree(&self, v: EntityId) -> Result<u32> {
        self.check(v)?;
        Ok(self.degree[v.index()])
    }

    #[inline]
    pub(crate) fn log_degree_unchecked(&self, v: u32) -> f64 {
        self.log_degree[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    /// Traversal neighbors: out-neighbors in directed mode.
    #[inline]
    pub(crate) fn out_row(&self, v: u32) -> &[u32] {
        self.out.row(v as usize)
    }

    pub(crate) fn in_row(&self, v: u32) -> &[u32] {
        match self.directedness {
            Directedness::Directed => self.inc.row(v as usize),
            Directedness::Undirected => self.out.row(v as usize),
        }
    }

    pub fn neighbors<'a>(
        &'a self,
        v: EntityId,
        exclusion: &'a EdgeExclusion,
    ) -> Result<impl Iterator<Item = EntityId> + 'a> {
        self.check(v)?;
        self.check_exclusion(exclusion)?;
        Ok(self
            .out_row(v.0)
            .iter()
            .map(|&w| EntityId(w))
            .filter(move |&w| !exclusion.contains(v, w)))
    }

    /// Direction-aware in directed mode.
    pub fn has_edge(&self, s: EntityId, o: EntityId) -> Result<bool> {
        self.check(s)?;
        self.check(o)?;
        Ok(self.out_row(s.0).binary_search(&o.0).is_ok())
    }

    /// Exclusion holding exactly the (s, o) edge when it exists.
    pub fn exclusion_for(&self, s: EntityId, o: EntityId) -> Result<EdgeExclusion> {
        let mut ex = EdgeExclusion::new(self.directedness);
        if self.has_edge(s, o)? {
            ex.insert(s, o);
        }
        Ok(ex)
    }

    /// Every edge once, as stored: (s, o) arcs in directed mode, (min, max) otherwise.
    pub fn edges(&self) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        let directed = self.directedness == Directedness::Directed;
        (0..self.node_count() as u32).flat_map(move |v| {
            self.out_row(v)
                .iter()
                .filter(move |&&w| directed || v < w)
                .map(move |&w| (EntityId(v), EntityId(w)))
        })
    }

    /// Undirected view obtained by forgetting orientation.
    pub fn to_undirected(&self) -> KnowledgeGraph {
        match self.directedness {
            Directedness::Undirected => self.clone(),
            Directedness::Directed => {
                let n = self.node_count();
                let mut offsets = Vec::with_capacity(n + 1);
                offsets.push(0u64);
                let mut targets = Vec::with_capacity(self.out.targets.len() * 2);
                for v in 0..n {
                    merge_sorted_dedup(self.out.row(v), self.inc.row(v), &mut targets);
                    offsets.push(targets.len() as u64);
                }
                targets.shrink_to_fit();
                Self::from_csr(Directedness::Undirected, Csr { offsets, targets }, Csr::default())
            }
        }
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.node_count();
        let degree = if n == 0 {
            DegreeSummary {
                min: 0,
                median: 0.0,
                max: 0,
                mean: 0.0,
            }
        } else {
            let mut sorted = self.degree.clone();
            sorted.sort_unstable();
            let median = if n % 2 == 1 {
                sorted[n / 2] as f64
            } else {
                (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
            };
            DegreeSummary {
                min: sorted[0],
                median,
                max: sorted[n - 1],
                mean: sorted.iter().map(|&d| d as f64).sum::<f64>() / n as f64,
            }
        };
        GraphStats {
            directedness: self.directedness,
            node_count: n as u64,
            edge_count: self.edge_count as u64,
            degree,
            connected_components: self.component_count() as u64,
        }
    }

    fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for root in 0..n {
            if seen[root] {
                continue;
            }
            components += 1;
            seen[root] = true;
            stack.push(root as u32);
            while let Some(v) = stack.pop() {
                let rows = [self.out_row(v), self.in_row(v)];
                for &w in rows.into_iter().flatten() {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }
}

fn transpose(out: &Csr, n: usize) -> Csr {
    let mut counts = vec![0u64; n + 1];
    for &t in &out.targets {
        counts[t as usize + 1] += 1;
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let mut cursor = counts.clone();
    let mut targets = vec![0u32; out.targets.len()];
    // sources visited in increasing order, so each in-row comes out sorted
    for v in 0..n {
        for &w in out.row(v) {
            let slot = &mut cursor[w as usize];
            targets[*slot as usize] = v as u32;
            *slot += 1;
        }
    }
    Csr {
        offsets: counts,
        targets,
    }
}

fn merge_sorted_dedup(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
}

/// Builds the graph for an edge list. An undirected edge list has lost its
/// orientation and cannot produce a directed graph.
pub fn build_graph(edge_list: &EdgeList, directedness: Directedness) -> Result<KnowledgeGraph> {
    if edge_list.directedness == Directedness::Undirected && directedness == Directedness::Directed {
        return Err(Error::validation(
            "cannot build a directed graph from an undirected edge list",
        ));
    }
    KnowledgeGraph::from_edges(edge_list.node_count(), &edge_list.edges, directedness)
}
