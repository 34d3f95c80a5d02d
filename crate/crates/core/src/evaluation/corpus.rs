//! Scoring a human-rated statement corpus and correlating with the ratings.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{correlate, CorrelationReport};
use super::roc::{auroc, RocReport};
use crate::error::{Error, Result};
use crate::ingest::Statement;
use crate::proximity::{truth_value_with, Closure, SearchScratch};
use crate::resolve::{resolve, ResolveOptions};
use crate::snapshot::KnowledgeBase;

pub const DEFAULT_MIN_SUBJECT_DEGREE: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Evaluated,
    Unresolved,
    LowDegree,
    Degenerate,
    Unrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub rating: Option<i8>,
    pub subject_degree: Option<u32>,
    pub tau: Option<f64>,
    pub edge_excluded: bool,
    pub status: RowStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub total: usize,
    pub evaluated: usize,
    pub unresolved: usize,
    pub low_degree: usize,
    pub degenerate: usize,
    pub unrated: usize,
    pub edges_excluded: usize,
    /// Evaluated rows with rating 0, left out of the AUROC labels.
    pub rating_ties_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEvaluation {
    pub closure: Closure,
    pub min_subject_degree: u32,
    pub correlation: CorrelationReport,
    /// Per predicate, where at least two non-constant rows survive.
    pub by_predicate: BTreeMap<String, CorrelationReport>,
    /// Labels: rating > 0 true, rating < 0 false. Absent if a class is empty.
    pub auroc: Option<RocReport>,
    pub counts: CorpusCounts,
    pub rows: Vec<CorpusRow>,
}

/// Keeps statements whose subject has degree > `min_subject_degree`, scores
/// them with their own edge removed, and correlates scores with ratings.
pub fn evaluate_annotated_corpus(
    kb: &KnowledgeBase,
    statements: &[Statement],
    closure: Closure,
    min_subject_degree: u32,
    opts: &ResolveOptions,
) -> Result<CorpusEvaluation> {
    let graph = &kb.graph;
    let rows: Vec<CorpusRow> = statements
        .par_iter()
        .map_init(
            || SearchScratch::new(graph.node_count()),
            |scratch, st| -> Result<CorpusRow> {
                let mut row = CorpusRow {
                    subject: st.subject.clone(),
                    predicate: st.predicate.clone(),
                    object: st.object.clone(),
                    rating: st.rating,
                    subject_degree: None,
                    tau: None,
                    edge_excluded: false,
                    status: RowStatus::Evaluated,
                };
                if st.rating.is_none() {
                    row.status = RowStatus::Unrated;
                    return Ok(row);
                }
                let (Some(s), Some(o)) = (
                    resolve(&kb.dictionary, &st.subject, opts),
                    resolve(&kb.dictionary, &st.object, opts),
                ) else {
                    row.status = RowStatus::Unresolved;
                    return Ok(row);
                };
                let k = graph.degree(s)?;
                row.subject_degree = Some(k);
                if k <= min_subject_degree {
                    row.status = RowStatus::LowDegree;
                    return Ok(row);
                }
                if s == o {
                    row.status = RowStatus::Degenerate;
                    return Ok(row);
                }
                let exclusion = graph.exclusion_for(s, o)?;
                row.edge_excluded = !exclusion.is_empty();
                row.tau = Some(truth_value_with(scratch, graph, s, o, closure, &exclusion)?.tau);
                Ok(row)
            },
        )
        .collect::<Result<_>>()?;

    let mut counts = CorpusCounts {
        total: rows.len(),
        ..Default::default()
    };
    for r in &rows {
        match r.status {
            RowStatus::Evaluated => counts.evaluated += 1,
            RowStatus::Unresolved => counts.unresolved += 1,
            RowStatus::LowDegree => counts.low_degree += 1,
            RowStatus::Degenerate => counts.degenerate += 1,
            RowStatus::Unrated => counts.unrated += 1,
        }
        counts.edges_excluded += usize::from(r.edge_excluded);
    }
    let evaluated: Vec<&CorpusRow> = rows.iter().filter(|r| r.status == RowStatus::Evaluated).collect();
    if evaluated.len() < 2 {
        return Err(Error::validation(format!(
            "only {} statements survive filtering; need at least 2",
            evaluated.len()
        )));
    }

    let pairs = |rs: &[&CorpusRow]| -> (Vec<f64>, Vec<f64>) {
        rs.iter().map(|r| (r.tau.unwrap(), f64::from(r.rating.unwrap()))).unzip()
    };
    let (scores, ratings) = pairs(&evaluated);
    let correlation = correlate(&scores, &ratings)?;

    let mut groups: BTreeMap<&str, Vec<&CorpusRow>> = BTreeMap::new();
    for r in &evaluated {
        groups.entry(r.predicate.as_str()).or_default().push(r);
    }
    let by_predicate = groups
        .into_iter()
        .filter_map(|(p, rs)| {
            let (x, y) = pairs(&rs);
            correlate(&x, &y).ok().map(|c| (p.to_owned(), c))
        })
        .collect();

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in &evaluated {
        match r.rating.unwrap() {
            x if x > 0 => pos.push(r.tau.unwrap()),
            x if x < 0 => neg.push(r.tau.unwrap()),
            _ => counts.rating_ties_dropped += 1,
        }
    }
    let auroc = if pos.is_empty() || neg.is_empty() {
        None
    } else {
        Some(auroc(&pos, &neg)?)
    };

    Ok(CorpusEvaluation {
        closure,
        min_subject_degree,
        correlation,
        by_predicate,
        auroc,
        counts,
        rows,
    })
}
