use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::EntityId;
use crate::error::{Error, Result};
use crate::graph::Directedness;
use crate::proximity::{truth_values_from_source, Closure, SearchScratch};
use crate::resolve::{resolve, ResolveOptions};
use crate::snapshot::KnowledgeBase;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Full path search under the chosen closure.
    #[default]
    TransitiveClosure,
    /// Direct edges only; every value is 0 or 1.
    InfoboxOnly,
}

/// Entities x target concepts, one truth value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<EntityId>,
    pub cols: Vec<EntityId>,
    pub values: Vec<Vec<f64>>,
    pub mode: FeatureMode,
    pub closure: Closure,
    pub directedness: Directedness,
}

impl FeatureMatrix {
    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    /// Column indices whose value is identical in every row.
    pub fn constant_columns(&self) -> Vec<usize> {
        (0..self.cols.len())
            .filter(|&j| self.values.windows(2).all(|w| w[0][j] == w[1][j]))
            .collect()
    }

    /// Restricts to the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: idx.iter().map(|&i| self.rows[i]).collect(),
            values: idx.iter().map(|&i| self.values[i].clone()).collect(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> FeatureMatrix {
        FeatureMatrix {
            rows: Vec::new(),
            cols: self.cols.clone(),
            values: Vec::new(),
            mode: self.mode,
            closure: self.closure,
            directedness: self.directedness,
        }
    }
}

/// Cell (i, j) is the truth value of (entity_i, target_j). Infobox-only mode
/// ignores `closure` and keeps only paths of exactly two nodes.
pub fn build_feature_matrix(
    kb: &KnowledgeBase,
    entities: &[EntityId],
    targets: &[EntityId],
    mode: FeatureMode,
    closure: Closure,
) -> Result<FeatureMatrix> {
    let graph = &kb.graph;
    let effective = match mode {
        FeatureMode::TransitiveClosure => {
            if closure == Closure::DirectOnly {
                return Err(Error::validation(
                    "transitive-closure features need the metric or ultrametric closure",
                ));
            }
            closure
        }
        FeatureMode::InfoboxOnly => Closure::DirectOnly,
    };
    let values = entities
        .par_iter()
        .map_init(SearchScratch::default, |scratch, &e| {
            truth_values_from_source(scratch, graph, e, targets, effective)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        rows: entities.to_vec(),
        cols: targets.to_vec(),
        values,
        mode,
        closure: effective,
        directedness: graph.directedness(),
    })
}

/// All nodes Y with a statement (Y, ·, concept): in-neighbors in a directed
/// graph, neighbors in an undirected one. Sorted by id.
pub fn discover_targets(kb: &KnowledgeBase, concept: &str, opts: &ResolveOptions) -> Result<Vec<EntityId>> {
    let c = resolve(&kb.dictionary, concept, opts).ok_or_else(|| Error::Unresolved {
        missing: vec![concept.to_owned()],
        suggestions: crate::resolve::suggestions(&kb.dictionary, concept, opts),
    })?;
    Ok(kb.graph.in_row(c.0).iter().map(|&v| EntityId(v)).collect())
}
