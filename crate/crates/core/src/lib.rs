//! Computational fact checking over knowledge graphs.
//!
//! Statements `(subject, predicate, object)` are scored by the best path
//! between subject and object, where paths through generic, high-degree
//! entities are penalized. The crate covers the whole pipeline: triple
//! ingestion, an immutable CSR graph with a binary snapshot format, the
//! metric and ultrametric path searches, evaluation (ROC, rank correlation)
//! and the classifier-based calibration experiment.

pub mod api;
pub mod calibration;
pub mod dictionary;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod ingest;
pub mod proximity;
pub mod report;
pub mod resolve;
pub mod snapshot;
pub mod synthetic;

pub use dictionary::{EntityDictionary, EntityId};
pub use error::{Error, ErrorKind, Result};
pub use graph::{build_graph, Directedness, EdgeExclusion, GraphStats, KnowledgeGraph};
pub use proximity::{
    brute_force_truth, path_weight_metric, path_weight_ultrametric, truth_value, truth_value_direct_only,
    truth_value_with, truth_values_from_source, SearchScratch,
    Closure, PathWitness, TruthResult,
};
pub use snapshot::KnowledgeBase;
