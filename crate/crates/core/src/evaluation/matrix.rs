use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roc::{auroc, RocReport};
use crate::dictionary::EntityId;
use crate::error::{Error, Result};
use crate::proximity::{truth_value_with, Closure, SearchScratch};
use crate::resolve::{resolve_all, ResolveOptions};
use crate::snapshot::KnowledgeBase;

/// Subjects x objects grid of truth values with the known-true cells marked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementMatrix {
    pub subjects: Vec<String>,
    pub objects: Vec<String>,
    pub tau: Vec<Vec<f64>>,
    pub truth_mask: Vec<Vec<bool>>,
    pub closure: Closure,
    /// Optional labels (decade, region, ...) for heatmap annotation.
    #[serde(default)]
    pub subject_groups: Vec<Option<String>>,
    #[serde(default)]
    pub object_groups: Vec<Option<String>>,
    /// Cells whose own edge existed and was excluded before scoring.
    pub excluded_edges: usize,
}

impl StatementMatrix {
    pub fn rows(&self) -> usize {
        self.subjects.len()
    }

    pub fn cols(&self) -> usize {
        self.objects.len()
    }

    /// (true-cell scores, false-cell scores), row-major.
    pub fn scores(&self) -> (Vec<f64>, Vec<f64>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (row, mask) in self.tau.iter().zip(&self.truth_mask) {
            for (&t, &is_true) in row.iter().zip(mask) {
                if is_true {
                    pos.push(t);
                } else {
                    neg.push(t);
                }
            }
        }
        (pos, neg)
    }

    pub fn roc(&self) -> Result<RocReport> {
        let (pos, neg) = self.scores();
        auroc(&pos, &neg)
    }
}

/// Statement-set input: distinct subjects and objects in first-seen order and
/// the cells marked true.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatementSet {
    pub subjects: Vec<String>,
    pub objects: Vec<String>,
    pub truth_mask: Vec<Vec<bool>>,
    #[serde(default)]
    pub subject_groups: Vec<Option<String>>,
    #[serde(default)]
    pub object_groups: Vec<Option<String>>,
}

impl StatementSet {
    /// Adds one statement row; every subject-object combination becomes a
    /// matrix cell, true if any row marks it true.
    pub fn push(&mut self, subject: &str, object: &str, is_true: bool, groups: (Option<String>, Option<String>)) {
        let i = match self.subjects.iter().position(|s| s == subject) {
            Some(i) => i,
            None => {
                self.subjects.push(subject.to_owned());
                self.subject_groups.push(groups.0);
                self.truth_mask.push(vec![false; self.objects.len()]);
                self.subjects.len() - 1
            }
        };
        let j = match self.objects.iter().position(|o| o == object) {
            Some(j) => j,
            None => {
                self.objects.push(object.to_owned());
                self.object_groups.push(groups.1);
                for row in &mut self.truth_mask {
                    row.push(false);
                }
                self.objects.len() - 1
            }
        };
        self.truth_mask[i][j] |= is_true;
    }

    pub fn validate(&self) -> Result<()> {
        let cells = self.subjects.len() * self.objects.len();
        let trues = self.truth_mask.iter().flatten().filter(|&&b| b).count();
        if cells == 0 {
            return Err(Error::validation("statement set is empty"));
        }
        if trues == 0 {
            return Err(Error::validation("no true statements (no positive class)"));
        }
        if trues == cells {
            return Err(Error::validation("every cell is true (no negative class)"));
        }
        Ok(())
    }
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "y" => Some(true),
        "0" | "false" | "f" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// CSV with header `subject,object,is_true` and optional `subject_group`,
/// `object_group` columns.
pub fn load_statement_set<R: Read>(source: R) -> Result<StatementSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Record {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(si), Some(oi), Some(ti)) = (col("subject"), col("object"), col("is_true")) else {
        return Err(Error::Record {
            row: 1,
            message: "header must contain subject, object and is_true".into(),
        });
    };
    let (sg, og) = (col("subject_group"), col("object_group"));

    let mut set = StatementSet::default();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| Error::Record {
            row,
            message: e.to_string(),
        })?;
        let get = |j: usize| rec.get(j).unwrap_or_default();
        let (s, o) = (get(si), get(oi));
        if s.is_empty() || o.is_empty() {
            return Err(Error::Record {
                row,
                message: "empty subject or object".into(),
            });
        }
        let is_true = parse_bool(get(ti)).ok_or_else(|| Error::Record {
            row,
            message: format!("is_true must be a boolean, got {:?}", get(ti)),
        })?;
        let group = |c: Option<usize>| c.map(get).filter(|g| !g.is_empty()).map(str::to_owned);
        set.push(s, o, is_true, (group(sg), group(og)));
    }
    Ok(set)
}

/// Scores every subject-object cell. Whenever a cell's own edge exists it is
/// excluded for that query, for true and false statements alike.
pub fn build_statement_matrix(
    kb: &KnowledgeBase,
    set: &StatementSet,
    closure: Closure,
    resolve: &ResolveOptions,
) -> Result<StatementMatrix> {
    let all_names: Vec<&str> = set.subjects.iter().chain(&set.objects).map(String::as_str).collect();
    let ids = resolve_all(&kb.dictionary, &all_names, resolve)?;
    let (subject_ids, object_ids) = ids.split_at(set.subjects.len());
    for (i, s) in subject_ids.iter().enumerate() {
        if let Some(j) = object_ids.iter().position(|o| o == s) {
            return Err(Error::validation(format!(
                "subject {:?} and object {:?} resolve to the same entity",
                set.subjects[i], set.objects[j]
            )));
        }
    }

    let graph = &kb.graph;
    let cols = object_ids.len();
    let cells: Vec<(EntityId, EntityId)> = subject_ids
        .iter()
        .flat_map(|&s| object_ids.iter().map(move |&o| (s, o)))
        .collect();
    let scored: Vec<(f64, bool)> = cells
        .par_iter()
        .map_init(
            || SearchScratch::new(graph.node_count()),
            |scratch, &(s, o)| -> Result<(f64, bool)> {
                let exclusion = graph.exclusion_for(s, o)?;
                let r = truth_value_with(scratch, graph, s, o, closure, &exclusion)?;
                Ok((r.tau, !exclusion.is_empty()))
            },
        )
        .collect::<Result<_>>()?;

    let excluded_edges = scored.iter().filter(|(_, ex)| *ex).count();
    let tau = if cols == 0 {
        vec![Vec::new(); subject_ids.len()]
    } else {
        scored.chunks(cols).map(|row| row.iter().map(|(t, _)| *t).collect()).collect()
    };
    Ok(StatementMatrix {
        subjects: set.subjects.clone(),
        objects: set.objects.clone(),
        tau,
        truth_mask: set.truth_mask.clone(),
        closure,
        subject_groups: set.subject_groups.clone(),
        object_groups: set.object_groups.clone(),
        excluded_edges,
    })
}
