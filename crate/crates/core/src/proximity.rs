//! Truth values as optimal-path semantic proximity.
//!
//! A path `s = v1, v2, ..., vn = o` is weighted by the degrees of its
//! intermediate nodes only:
//!
//! * metric:      `W = 1 / (1 + sum ln k(vi))`, i = 2..n-1
//! * ultrametric: `W = 1 / (1 + max ln k(vi))`, and `W = 1` when n = 2
//!
//! The truth value of `(s, o)` is the maximum `W` over all s-o paths, found by
//! a node-weighted Dijkstra search (sum or max as the path combiner). Natural
//! logarithms throughout.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dictionary::EntityId;
use crate::error::{Error, Result};
use crate::graph::{EdgeExclusion, KnowledgeGraph};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    #[default]
    Metric,
    Ultrametric,
    DirectOnly,
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Closure::Metric => "metric",
            Closure::Ultrametric => "ultrametric",
            Closure::DirectOnly => "direct_only",
        })
    }
}

impl FromStr for Closure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "metric" => Ok(Closure::Metric),
            "ultrametric" | "ultra_metric" => Ok(Closure::Ultrametric),
            "direct_only" | "direct" | "infobox" | "infobox_only" => Ok(Closure::DirectOnly),
            other => Err(Error::validation(format!("unknown closure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathWitness {
    pub nodes: Vec<EntityId>,
    /// Sum (metric) or max (ultrametric) of ln k over intermediate nodes.
    pub cost: f64,
}

impl PathWitness {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intermediates(&self) -> &[EntityId] {
        match self.nodes.len() {
            0..=2 => &[],
            n => &self.nodes[1..n - 1],
        }
    }

    /// Whether the path traverses the edge (a, b), in either direction.
    pub fn uses_edge(&self, a: EntityId, b: EntityId) -> bool {
        self.nodes
            .windows(2)
            .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthResult {
    pub tau: f64,
    pub witness: Option<PathWitness>,
    pub closure: Closure,
    pub reachable: bool,
}

impl TruthResult {
    fn unreachable(closure: Closure) -> Self {
        TruthResult {
            tau: 0.0,
            witness: None,
            closure,
            reachable: false,
        }
    }

    fn from_witness(witness: PathWitness, closure: Closure) -> Self {
        TruthResult {
            tau: weight_from_cost(witness.cost),
            witness: Some(witness),
            closure,
            reachable: true,
        }
    }
}

#[inline]
fn weight_from_cost(cost: f64) -> f64 {
    1.0 / (1.0 + cost)
}

fn validate_path(path: &[EntityId], graph: &KnowledgeGraph) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::validation("a path needs at least two nodes"));
    }
    for w in path.windows(2) {
        if !graph.has_edge(w[0], w[1])? {
            return Err(Error::validation(format!("no edge between {} and {}", w[0], w[1])));
        }
    }
    let mut seen: Vec<EntityId> = path.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::validation("path repeats a node"));
    }
    Ok(())
}

/// Σ ln k over intermediates, summed left to right.
fn metric_cost(path: &[EntityId], graph: &KnowledgeGraph) -> f64 {
    path[1..path.len() - 1]
        .iter()
        .fold(0.0, |acc, v| acc + graph.log_degree_unchecked(v.0))
}

fn ultrametric_cost(path: &[EntityId], graph: &KnowledgeGraph) -> f64 {
    path[1..path.len() - 1]
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(graph.log_degree_unchecked(v.0)))
}

pub fn path_weight_metric(path: &[EntityId], graph: &KnowledgeGraph) -> Result<f64> {
    validate_path(path, graph)?;
    Ok(weight_from_cost(metric_cost(path, graph)))
}

pub fn path_weight_ultrametric(path: &[EntityId], graph: &KnowledgeGraph) -> Result<f64> {
    validate_path(path, graph)?;
    Ok(weight_from_cost(ultrametric_cost(path, graph)))
}

pub fn path_weight(path: &[EntityId], graph: &KnowledgeGraph, closure: Closure) -> Result<f64> {
    match closure {
        Closure::Metric => path_weight_metric(path, graph),
        Closure::Ultrametric => path_weight_ultrametric(path, graph),
        Closure::DirectOnly => {
            validate_path(path, graph)?;
            Ok(if path.len() == 2 { 1.0 } else { 0.0 })
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on cost, then on node id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Query-local buffers. Reusable across queries on graphs of the same size;
/// never shared between concurrent searches.
#[derive(Debug, Default)]
pub struct SearchScratch {
    cost: Vec<f64>,
    pred: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Entry>,
}

impl fmt::Debug for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.node, self.cost)
    }
}

impl SearchScratch {
    pub fn new(node_count: usize) -> Self {
        let mut s = Self::default();
        s.reset(node_count);
        s
    }

    fn reset(&mut self, node_count: usize) {
        if self.stamp.len() != node_count {
            self.cost = vec![f64::INFINITY; node_count];
            self.pred = vec![u32::MAX; node_count];
            self.stamp = vec![0; node_count];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.heap.clear();
    }

    #[inline]
    fn get(&self, v: u32) -> f64 {
        if self.stamp[v as usize] == self.epoch {
            self.cost[v as usize]
        } else {
            f64::INFINITY
        }
    }

    #[inline]
    fn set(&mut self, v: u32, cost: f64, pred: u32) {
        let i = v as usize;
        self.stamp[i] = self.epoch;
        self.cost[i] = cost;
        self.pred[i] = pred;
    }
}

fn check_query(graph: &KnowledgeGraph, s: EntityId, o: EntityId, exclusion: &EdgeExclusion) -> Result<()> {
    graph.degree(s)?;
    graph.degree(o)?;
    graph.check_exclusion(exclusion)?;
    if s == o {
        return Err(Error::validation(format!(
            "subject and object are the same entity {s}; reflexive statements are undefined"
        )));
    }
    Ok(())
}

pub fn truth_value(
    graph: &KnowledgeGraph,
    s: EntityId,
    o: EntityId,
    closure: Closure,
    exclusion: &EdgeExclusion,
) -> Result<TruthResult> {
    let mut scratch = SearchScratch::default();
    truth_value_with(&mut scratch, graph, s, o, closure, exclusion)
}

/// `truth_value` reusing caller-owned buffers.
pub fn truth_value_with(
    scratch: &mut SearchScratch,
    graph: &KnowledgeGraph,
    s: EntityId,
    o: EntityId,
    closure: Closure,
    exclusion: &EdgeExclusion,
) -> Result<TruthResult> {
    check_query(graph, s, o, exclusion)?;
    let found = match closure {
        Closure::DirectOnly => return Ok(direct(graph, s, o, exclusion)),
        Closure::Metric => search(scratch, graph, s, o, exclusion, |acc, step| acc + step),
        Closure::Ultrametric => search(scratch, graph, s, o, exclusion, f64::max),
    };
    Ok(match found {
        Some(witness) => TruthResult::from_witness(witness, closure),
        None => TruthResult::unreachable(closure),
    })
}

pub fn truth_value_direct_only(
    graph: &KnowledgeGraph,
    s: EntityId,
    o: EntityId,
    exclusion: &EdgeExclusion,
) -> Result<TruthResult> {
    check_query(graph, s, o, exclusion)?;
    Ok(direct(graph, s, o, exclusion))
}

fn direct(graph: &KnowledgeGraph, s: EntityId, o: EntityId, exclusion: &EdgeExclusion) -> TruthResult {
    let present = graph.out_row(s.0).binary_search(&o.0).is_ok() && !exclusion.contains(s, o);
    if present {
        TruthResult::from_witness(
            PathWitness {
                nodes: vec![s, o],
                cost: 0.0,
            },
            Closure::DirectOnly,
        )
    } else {
        TruthResult::unreachable(Closure::DirectOnly)
    }
}

/// Node-weighted Dijkstra. Entering `w != o` costs ln k(w); entering `o`
/// costs nothing. `combine` is `+` (metric) or `max` (ultrametric); both are
/// monotone over non-negative steps, so the first time `o` is popped its cost
/// is optimal.
fn search(
    scratch: &mut SearchScratch,
    graph: &KnowledgeGraph,
    s: EntityId,
    o: EntityId,
    exclusion: &EdgeExclusion,
    combine: impl Fn(f64, f64) -> f64,
) -> Option<PathWitness> {
    scratch.reset(graph.node_count());
    let (s, o) = (s.0, o.0);
    scratch.set(s, 0.0, u32::MAX);
    scratch.heap.push(Entry { cost: 0.0, node: s });

    while let Some(Entry { cost, node: v }) = scratch.heap.pop() {
        if cost > scratch.get(v) {
            continue;
        }
        if v == o {
            return Some(reconstruct(scratch, s, o, cost));
        }
        for &w in graph.out_row(v) {
            if w == s || exclusion.contains(EntityId(v), EntityId(w)) {
                continue;
            }
            let step = if w == o { 0.0 } else { graph.log_degree_unchecked(w) };
            let next = combine(cost, step);
            if next < scratch.get(w) {
                scratch.set(w, next, v);
                scratch.heap.push(Entry { cost: next, node: w });
            }
        }
    }
    None
}

fn reconstruct(scratch: &SearchScratch, s: u32, o: u32, cost: f64) -> PathWitness {
    let mut nodes = vec![EntityId(o)];
    let mut v = o;
    while v != s {
        v = scratch.pred[v as usize];
        nodes.push(EntityId(v));
    }
    nodes.reverse();
    PathWitness { nodes, cost }
}

/// Truth values of `(s, o)` for every `o` in `targets`, from a single search
/// and without any exclusion.
///
/// The search settles nodes in order of `d(u)`, the combined cost of reaching
/// `u` including `u`'s own ln k. A target `o` is reached through its first
/// settled in-neighbor `u`, at cost `d(u)`; later in-neighbors cannot do
/// better. Results equal per-pair `truth_value`.
pub fn truth_values_from_source(
    scratch: &mut SearchScratch,
    graph: &KnowledgeGraph,
    s: EntityId,
    targets: &[EntityId],
    closure: Closure,
) -> Result<Vec<f64>> {
    graph.degree(s)?;
    for &o in targets {
        graph.degree(o)?;
        if o == s {
            return Err(Error::validation(format!(
                "source {s} is also a target; reflexive statements are undefined"
            )));
        }
    }
    if closure == Closure::DirectOnly {
        return Ok(targets
            .iter()
            .map(|o| if graph.out_row(s.0).binary_search(&o.0).is_ok() { 1.0 } else { 0.0 })
            .collect());
    }
    let combine = match closure {
        Closure::Metric => |a: f64, b: f64| a + b,
        _ => f64::max,
    };

    let n = graph.node_count();
    let mut arrival: Vec<f64> = vec![f64::INFINITY; targets.len()];
    let mut slots: std::collections::HashMap<u32, Vec<usize>> = std::collections::HashMap::new();
    for (i, o) in targets.iter().enumerate() {
        slots.entry(o.0).or_default().push(i);
    }
    let mut remaining = slots.len();
    if remaining == 0 {
        return Ok(Vec::new());
    }
    scratch.reset(n);
    scratch.set(s.0, 0.0, u32::MAX);
    scratch.heap.push(Entry { cost: 0.0, node: s.0 });
    while let Some(Entry { cost, node: v }) = scratch.heap.pop() {
        if cost > scratch.get(v) {
            continue;
        }
        for &w in graph.out_row(v) {
            if let Some(idx) = slots.get(&w) {
                if arrival[idx[0]].is_infinite() {
                    for &i in idx {
                        arrival[i] = cost;
                    }
                    remaining -= 1;
                }
            }
            if w == s.0 {
                continue;
            }
            let next = combine(cost, graph.log_degree_unchecked(w));
            if next < scratch.get(w) {
                scratch.set(w, next, v);
                scratch.heap.push(Entry { cost: next, node: w });
            }
        }
        if remaining == 0 {
            break;
        }
    }
    Ok(arrival
        .into_iter()
        .map(|a| if a.is_finite() { weight_from_cost(a) } else { 0.0 })
        .collect())
}

pub const DEFAULT_BRUTE_FORCE_MAX_NODES: usize = 14;

/// Exhaustive reference: enumerates every simple s-o path and keeps the best
/// weight according to the path-weight functions above.
pub fn brute_force_truth(
    graph: &KnowledgeGraph,
    s: EntityId,
    o: EntityId,
    closure: Closure,
    exclusion: &EdgeExclusion,
    max_nodes: usize,
) -> Result<TruthResult> {
    if graph.node_count() > max_nodes {
        return Err(Error::validation(format!(
            "brute force refused: {} nodes exceeds limit {max_nodes}",
            graph.node_count()
        )));
    }
    check_query(graph, s, o, exclusion)?;

    let mut best: Option<(f64, Vec<EntityId>)> = None;
    let mut path = vec![s];
    let mut on_path = vec![false; graph.node_count()];
    on_path[s.index()] = true;
    enumerate(graph, o, exclusion, &mut path, &mut on_path, &mut |p: &[EntityId]| {
        let w = path_weight(p, graph, closure).expect("enumerated paths are valid");
        if best.as_ref().is_none_or(|(b, _)| w > *b) {
            best = Some((w, p.to_vec()));
        }
    });

    Ok(match best {
        Some((w, nodes)) if w > 0.0 => {
            let cost = match closure {
                Closure::Metric => metric_cost(&nodes, graph),
                Closure::Ultrametric => ultrametric_cost(&nodes, graph),
                Closure::DirectOnly => 0.0,
            };
            TruthResult {
                tau: w,
                witness: Some(PathWitness { nodes, cost }),
                closure,
                reachable: true,
            }
        }
        _ => TruthResult::unreachable(closure),
    })
}

fn enumerate(
    graph: &KnowledgeGraph,
    target: EntityId,
    exclusion: &EdgeExclusion,
    path: &mut Vec<EntityId>,
    on_path: &mut [bool],
    visit: &mut dyn FnMut(&[EntityId]),
) {
    let v = *path.last().unwrap();
    if v == target {
        visit(path);
        return;
    }
    for &w in graph.out_row(v.0) {
        let w = EntityId(w);
        if on_path[w.index()] || exclusion.contains(v, w) {
            continue;
        }
        on_path[w.index()] = true;
        path.push(w);
        enumerate(graph, target, exclusion, path, on_path, visit);
        path.pop();
        on_path[w.index()] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Directedness;
    use proptest::prelude::*;

    const S: u32 = 0;
    const A: u32 = 1;
    const O: u32 = 2;
    const X: u32 = 3;
    const B: u32 = 4;
    const C: u32 = 5;

    fn ids(v: &[u32]) -> Vec<EntityId> {
        v.iter().map(|&i| EntityId(i)).collect()
    }

    /// {(s,a),(a,o),(a,x),(s,b),(b,c),(c,o)}: k(a)=3, k(b)=k(c)=2.
    fn fixture() -> KnowledgeGraph {
        let edges = [(S, A), (A, O), (A, X), (S, B), (B, C), (C, O)];
        let edges: Vec<_> = edges.iter().map(|&(s, o)| (EntityId(s), EntityId(o))).collect();
        KnowledgeGraph::from_edges(6, &edges, Directedness::Undirected).unwrap()
    }

    #[test]
    fn path_weights_on_fixture() {
        let g = fixture();
        let metric = |p: &[u32]| path_weight_metric(&ids(p), &g).unwrap();
        let ultra = |p: &[u32]| path_weight_ultrametric(&ids(p), &g).unwrap();
        assert_eq!(metric(&[S, A]), 1.0);
        assert_eq!(ultra(&[S, A]), 1.0);
        assert!((metric(&[S, A, O]) - 1.0 / (1.0 + 3f64.ln())).abs() < 1e-15);
        assert!((metric(&[S, A, O]) - 0.47650).abs() < 1e-5);
        assert!((metric(&[S, B, C, O]) - 0.41906).abs() < 1e-5);
        assert!((ultra(&[S, A, O]) - 0.47650).abs() < 1e-5);
        assert!((ultra(&[S, B, C, O]) - 0.59061).abs() < 1e-5);
    }

    #[test]
    fn invalid_paths_rejected() {
        let g = fixture();
        assert!(path_weight_metric(&ids(&[S, O]), &g).is_err());
        assert!(path_weight_metric(&ids(&[S]), &g).is_err());
        assert!(path_weight_ultrametric(&ids(&[S, A, S, B]), &g).is_err());
        assert!(path_weight_metric(&ids(&[S, 42]), &g).is_err());
    }

    #[test]
    fn metric_and_ultrametric_diverge_on_fixture() {
        let g = fixture();
        let none = EdgeExclusion::none();
        let m = truth_value(&g, EntityId(S), EntityId(O), Closure::Metric, &none).unwrap();
        assert!((m.tau - 1.0 / (1.0 + 3f64.ln())).abs() < 1e-12);
        assert_eq!(m.witness.unwrap().nodes, ids(&[S, A, O]));
        let u = truth_value(&g, EntityId(S), EntityId(O), Closure::Ultrametric, &none).unwrap();
        assert!((u.tau - 1.0 / (1.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(u.witness.unwrap().nodes, ids(&[S, B, C, O]));
        for closure in [Closure::Metric, Closure::Ultrametric] {
            let bf = brute_force_truth(&g, EntityId(S), EntityId(O), closure, &none, 14).unwrap();
            let fast = truth_value(&g, EntityId(S), EntityId(O), closure, &none).unwrap();
            assert!((bf.tau - fast.tau).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_edge_gives_full_truth() {
        let g = fixture();
        let r = truth_value(&g, EntityId(S), EntityId(A), Closure::Metric, &EdgeExclusion::none()).unwrap();
        assert_eq!(r.tau, 1.0);
        assert_eq!(r.witness.unwrap().len(), 2);
    }

    #[test]
    fn disconnected_pair() {
        let edges = ids(&[0, 1]);
        let g = KnowledgeGraph::from_edges(4, &[(edges[0], edges[1])], Directedness::Undirected).unwrap();
        for closure in [Closure::Metric, Closure::Ultrametric, Closure::DirectOnly] {
            let r = truth_value(&g, EntityId(0), EntityId(3), closure, &EdgeExclusion::none()).unwrap();
            assert_eq!((r.tau, r.reachable, r.witness.is_none()), (0.0, false, true));
            let bf = brute_force_truth(&g, EntityId(0), EntityId(3), closure, &EdgeExclusion::none(), 14).unwrap();
            assert_eq!(bf.tau, 0.0);
        }
    }

    #[test]
    fn direct_only_mode() {
        let g = fixture();
        let none = EdgeExclusion::none();
        let r = truth_value_direct_only(&g, EntityId(S), EntityId(A), &none).unwrap();
        assert_eq!((r.tau, r.closure), (1.0, Closure::DirectOnly));
        let ex = EdgeExclusion::single(EntityId(A), EntityId(S), Directedness::Undirected);
        assert_eq!(truth_value_direct_only(&g, EntityId(S), EntityId(A), &ex).unwrap().tau, 0.0);
        // s-a-o only
        assert_eq!(truth_value_direct_only(&g, EntityId(S), EntityId(O), &none).unwrap().tau, 0.0);
    }

    #[test]
    fn degenerate_and_invalid_queries() {
        let g = fixture();
        let none = EdgeExclusion::none();
        assert!(truth_value(&g, EntityId(S), EntityId(S), Closure::Metric, &none).is_err());
        assert!(truth_value(&g, EntityId(S), EntityId(99), Closure::Metric, &none).is_err());
        assert!(truth_value_direct_only(&g, EntityId(A), EntityId(A), &none).is_err());
    }

    #[test]
    fn brute_force_refuses_large_graphs() {
        let g = fixture();
        let err = brute_force_truth(&g, EntityId(S), EntityId(O), Closure::Metric, &EdgeExclusion::none(), 5);
        assert!(err.is_err());
    }

    #[test]
    fn closure_parsing() {
        assert_eq!("ultra-metric".parse::<Closure>().unwrap(), Closure::Ultrametric);
        assert_eq!("metric".parse::<Closure>().unwrap(), Closure::Metric);
        assert!("euclid".parse::<Closure>().is_err());
    }

    #[test]
    fn hub_aversion_example() {
        // two 3-node paths s-h-o and s-l-o; hub h has 4 extra leaves
        let mut e = vec![(0, 1), (1, 2), (0, 3), (3, 2)];
        for leaf in 4..8 {
            e.push((1, leaf));
        }
        let edges: Vec<_> = e.iter().map(|&(a, b)| (EntityId(a), EntityId(b))).collect();
        let g = KnowledgeGraph::from_edges(8, &edges, Directedness::Undirected).unwrap();
        let hub = path_weight_metric(&ids(&[0, 1, 2]), &g).unwrap();
        let low = path_weight_metric(&ids(&[0, 3, 2]), &g).unwrap();
        assert!(low > hub);
        let r = truth_value(&g, EntityId(0), EntityId(2), Closure::Metric, &EdgeExclusion::none()).unwrap();
        assert_eq!(r.witness.unwrap().nodes, ids(&[0, 3, 2]));
    }

    #[test]
    fn scratch_reuse_across_queries() {
        let g = fixture();
        let none = EdgeExclusion::none();
        let mut scratch = SearchScratch::new(g.node_count());
        for _ in 0..3 {
            for s in 0..6 {
                for o in 0..6 {
                    if s == o {
                        continue;
                    }
                    let a = truth_value_with(&mut scratch, &g, EntityId(s), EntityId(o), Closure::Metric, &none).unwrap();
                    let b = truth_value(&g, EntityId(s), EntityId(o), Closure::Metric, &none).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    fn arb_graph() -> impl Strategy<Value = (KnowledgeGraph, u32, u32)> {
        (3usize..10, any::<bool>()).prop_flat_map(|(n, directed)| {
            let d = if directed { Directedness::Directed } else { Directedness::Undirected };
            (
                proptest::collection::vec((0..n as u32, 0..n as u32), 0..(n * 3)),
                0..n as u32,
                0..n as u32,
            )
                .prop_filter("distinct endpoints", |(_, s, o)| s != o)
                .prop_map(move |(pairs, s, o)| {
                    let edges: Vec<_> = pairs.iter().map(|&(a, b)| (EntityId(a), EntityId(b))).collect();
                    (KnowledgeGraph::from_edges(n, &edges, d).unwrap(), s, o)
                })
        })
    }

    proptest! {
        #[test]
        fn range_and_dominance((g, s, o) in arb_graph()) {
            let none = EdgeExclusion::new(g.directedness());
            let m = truth_value(&g, EntityId(s), EntityId(o), Closure::Metric, &none).unwrap();
            let u = truth_value(&g, EntityId(s), EntityId(o), Closure::Ultrametric, &none).unwrap();
            for r in [&m, &u] {
                prop_assert!((0.0..=1.0).contains(&r.tau));
                let direct = g.has_edge(EntityId(s), EntityId(o)).unwrap();
                prop_assert_eq!(r.tau == 1.0, direct);
                if let Some(w) = &r.witness {
                    prop_assert_eq!(w.len() == 2, r.tau == 1.0);
                    prop_assert_eq!(w.nodes[0], EntityId(s));
                    prop_assert_eq!(*w.nodes.last().unwrap(), EntityId(o));
                    prop_assert!((path_weight(&w.nodes, &g, r.closure).unwrap() - r.tau).abs() < 1e-12);
                } else {
                    prop_assert!(!r.reachable && r.tau == 0.0);
                }
            }
            prop_assert!(u.tau >= m.tau);
        }

        #[test]
        fn multi_target_matches_per_pair((g, s, _o) in arb_graph()) {
            let d = g.directedness();
            let targets: Vec<EntityId> = (0..g.node_count() as u32).filter(|&t| t != s).map(EntityId).collect();
            let mut scratch = SearchScratch::default();
            for closure in [Closure::Metric, Closure::Ultrametric, Closure::DirectOnly] {
                let many = truth_values_from_source(&mut scratch, &g, EntityId(s), &targets, closure).unwrap();
                for (o, tau) in targets.iter().zip(many) {
                    let one = truth_value(&g, EntityId(s), *o, closure, &EdgeExclusion::new(d)).unwrap();
                    prop_assert!((one.tau - tau).abs() < 1e-12, "{} -> {}: {} vs {}", s, o, one.tau, tau);
                }
            }
        }

        #[test]
        fn exclusion_never_increases_truth((g, s, o) in arb_graph(), pick in any::<prop::sample::Index>()) {
            let d = g.directedness();
            let edges: Vec<_> = g.edges().collect();
            prop_assume!(!edges.is_empty());
            let (a, b) = edges[pick.index(edges.len())];
            let none = EdgeExclusion::new(d);
            let mut one = EdgeExclusion::new(d);
            one.insert(a, b);
            for closure in [Closure::Metric, Closure::Ultrametric, Closure::DirectOnly] {
                let base = truth_value(&g, EntityId(s), EntityId(o), closure, &none).unwrap().tau;
                let cut = truth_value(&g, EntityId(s), EntityId(o), closure, &one).unwrap().tau;
                prop_assert!(cut <= base);
            }
        }

        #[test]
        fn endpoint_degrees_do_not_matter((g, s, o) in arb_graph(), extra in 1usize..5) {
            // attach fresh leaves to s and o only: intermediate degrees unchanged
            let n = g.node_count();
            let d = g.directedness();
            let mut edges: Vec<_> = g.edges().collect();
            for i in 0..extra {
                edges.push((EntityId(s), EntityId((n + 2 * i) as u32)));
                edges.push((EntityId((n + 2 * i + 1) as u32), EntityId(o)));
            }
            let bigger = KnowledgeGraph::from_edges(n + 2 * extra, &edges, d).unwrap();
            for closure in [Closure::Metric, Closure::Ultrametric] {
                let a = truth_value(&g, EntityId(s), EntityId(o), closure, &EdgeExclusion::new(d)).unwrap();
                let b = truth_value(&bigger, EntityId(s), EntityId(o), closure, &EdgeExclusion::new(d)).unwrap();
                prop_assert!((a.tau - b.tau).abs() < 1e-12);
            }
        }

        #[test]
        fn hub_aversion(len in 1usize..4, extra in 1usize..4) {
            // two parallel s-o paths with `len` intermediates each; the second
            // path's intermediates each get `extra` additional leaves
            let (s, o) = (0u32, 1u32);
            let mut next = 2u32;
            let mut edges = Vec::new();
            let mut paths = Vec::new();
            for heavy in [false, true] {
                let mut prev = s;
                let mut nodes = vec![EntityId(s)];
                for _ in 0..len {
                    let v = next;
                    next += 1;
                    edges.push((EntityId(prev), EntityId(v)));
                    nodes.push(EntityId(v));
                    if heavy {
                        for _ in 0..extra {
                            edges.push((EntityId(v), EntityId(next)));
                            next += 1;
                        }
                    }
                    prev = v;
                }
                edges.push((EntityId(prev), EntityId(o)));
                nodes.push(EntityId(o));
                paths.push(nodes);
            }
            let g = KnowledgeGraph::from_edges(next as usize, &edges, Directedness::Undirected).unwrap();
            let light = path_weight_metric(&paths[0], &g).unwrap();
            let heavy = path_weight_metric(&paths[1], &g).unwrap();
            prop_assert!(light > heavy);
        }
    }
}
