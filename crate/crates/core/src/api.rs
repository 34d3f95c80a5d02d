//! Request and response bodies shared by the HTTP server and its client,
//! plus the request handlers that only need a loaded graph.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorKind, Result};
use crate::evaluation::{
    auroc, build_statement_matrix, evaluate_annotated_corpus, matrix_manifest, CorpusEvaluation, MatrixManifest,
    RocReport, StatementMatrix, StatementSet, DEFAULT_MIN_SUBJECT_DEGREE,
};
use crate::graph::{Directedness, EdgeExclusion};
use crate::ingest::Statement;
use crate::proximity::{truth_value, Closure};
use crate::resolve::{resolve_all, ResolveOptions};
use crate::snapshot::KnowledgeBase;

/// Error body of every failed request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suggestions: Vec<String>,
}

impl From<&Error> for ApiError {
    fn from(e: &Error) -> Self {
        let (missing, suggestions) = match e {
            Error::Unresolved { missing, suggestions } => (missing.clone(), suggestions.clone()),
            _ => (Vec::new(), Vec::new()),
        };
        ApiError {
            kind: e.kind(),
            message: e.to_string(),
            missing,
            suggestions,
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)?;
        if !self.suggestions.is_empty() {
            write!(f, " (did you mean: {})", self.suggestions.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ApiError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadGraphRequest {
    pub path: PathBuf,
    /// Defaults to the file stem.
    #[serde(default)]
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub id: String,
    pub path: PathBuf,
    pub directedness: Directedness,
    pub node_count: usize,
    pub edge_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRequest {
    pub subject: String,
    pub object: String,
    #[serde(default)]
    pub closure: Closure,
    /// Graph view to search; defaults to the snapshot's own directedness.
    #[serde(default)]
    pub view: Option<Directedness>,
    /// Remove the statement's own edge before searching.
    #[serde(default)]
    pub exclude_existing: bool,
    #[serde(default)]
    pub resolve: ResolveOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub name: String,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResponse {
    pub subject: String,
    pub object: String,
    pub closure: Closure,
    pub directedness: Directedness,
    pub tau: f64,
    pub reachable: bool,
    /// Witness path from subject to object, endpoints included.
    pub path: Vec<PathStep>,
    /// Whether a direct edge existed and was removed for this query.
    pub excluded_edge: bool,
}

pub fn check(kb: &KnowledgeBase, req: &CheckRequest) -> Result<CheckResponse> {
    let ids = resolve_all(&kb.dictionary, &[&req.subject, &req.object], &req.resolve)?;
    let (s, o) = (ids[0], ids[1]);
    let graph = &kb.graph;
    let exclusion = if req.exclude_existing {
        graph.exclusion_for(s, o)?
    } else {
        EdgeExclusion::none()
    };
    let result = truth_value(graph, s, o, req.closure, &exclusion)?;
    let path = match &result.witness {
        Some(w) => w
            .nodes
            .iter()
            .map(|&v| {
                Ok(PathStep {
                    name: kb.name(v).to_owned(),
                    degree: graph.degree(v)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    Ok(CheckResponse {
        subject: kb.name(s).to_owned(),
        object: kb.name(o).to_owned(),
        closure: req.closure,
        directedness: graph.directedness(),
        tau: result.tau,
        reachable: result.reachable,
        path,
        excluded_edge: !exclusion.is_empty(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRequest {
    pub statements: StatementSet,
    #[serde(default)]
    pub closure: Closure,
    #[serde(default)]
    pub view: Option<Directedness>,
    #[serde(default)]
    pub resolve: ResolveOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixResponse {
    pub matrix: StatementMatrix,
    pub roc: RocReport,
    pub manifest: MatrixManifest,
}

pub fn matrix(kb: &KnowledgeBase, req: &MatrixRequest) -> Result<MatrixResponse> {
    req.statements.validate()?;
    let matrix = build_statement_matrix(kb, &req.statements, req.closure, &req.resolve)?;
    let roc = matrix.roc()?;
    let manifest = matrix_manifest(&matrix, "matrix.csv");
    Ok(MatrixResponse { matrix, roc, manifest })
}

fn default_min_degree() -> u32 {
    DEFAULT_MIN_SUBJECT_DEGREE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRequest {
    pub statements: Vec<Statement>,
    #[serde(default)]
    pub closure: Closure,
    #[serde(default = "default_min_degree")]
    pub min_subject_degree: u32,
    #[serde(default)]
    pub view: Option<Directedness>,
    #[serde(default)]
    pub resolve: ResolveOptions,
}

pub fn corpus(kb: &KnowledgeBase, req: &CorpusRequest) -> Result<CorpusEvaluation> {
    evaluate_annotated_corpus(kb, &req.statements, req.closure, req.min_subject_degree, &req.resolve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AurocRequest {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

pub fn roc(req: &AurocRequest) -> Result<RocReport> {
    auroc(&req.positive, &req.negative)
}
