//! The calibration experiment: entities are described by their truth values
//! toward a set of target concepts, and classifiers trained on those
//! features show how much class information each closure preserves.

mod cv;
mod features;
mod forest;
mod knn;

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cv::{
    assign_folds, AggregateScore, BinaryLabels, Confusion, CvReport, FoldScore, FoldSpec, OutOfFold,
};
pub use features::{build_feature_matrix, discover_targets, FeatureMatrix, FeatureMode};
pub use forest::{train_forest, train_tree, tree_seed, Forest, ForestParams, Tree};
pub use knn::{knn_predict, knn_tie_break, KnnParams};

use crate::dictionary::EntityId;
use crate::error::{Error, Result};
use crate::graph::Directedness;
use crate::proximity::Closure;
use crate::resolve::{resolve_all, resolve_partial, suggestions, ResolveOptions};
use crate::snapshot::KnowledgeBase;

pub const DEFAULT_TARGET_CONCEPT: &str = "Ideology";
pub const DEFAULT_MIN_RESOLVED_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierConfig {
    Knn(KnnParams),
    RandomForest(ForestParams),
}

impl ClassifierConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Knn(_) => "knn",
            ClassifierConfig::RandomForest(_) => "random_forest",
        }
    }

    pub fn defaults() -> Vec<ClassifierConfig> {
        vec![
            ClassifierConfig::Knn(KnnParams::default()),
            ClassifierConfig::RandomForest(ForestParams::default()),
        ]
    }

    fn validate(&self) -> Result<()> {
        match self {
            ClassifierConfig::Knn(p) if p.k == 0 => Err(Error::validation("k must be at least 1")),
            ClassifierConfig::RandomForest(p) if p.trees == 0 => Err(Error::validation("need at least one tree")),
            ClassifierConfig::RandomForest(p) if p.min_leaf == 0 => Err(Error::validation("min_leaf must be at least 1")),
            _ => Ok(()),
        }
    }
}

fn check_rows(x: &[Vec<f64>], labels: &BinaryLabels) -> Result<usize> {
    if x.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} feature rows but {} labels",
            x.len(),
            labels.len()
        )));
    }
    let width = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != width) {
        return Err(Error::validation("feature rows differ in length"));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation("features must be finite"));
    }
    Ok(width)
}

fn constant_columns(x: &[Vec<f64>], width: usize) -> Vec<usize> {
    (0..width).filter(|&j| x.windows(2).all(|w| w[0][j] == w[1][j])).collect()
}

/// Stratified k-fold cross-validation of one classifier. Folds are trained
/// in parallel and merged in row order, so the report depends only on the
/// inputs, the classifier settings and `spec`.
pub fn cross_validate(
    x: &[Vec<f64>],
    labels: &BinaryLabels,
    classifier: &ClassifierConfig,
    spec: &FoldSpec,
) -> Result<CvReport> {
    classifier.validate()?;
    let width = check_rows(x, labels)?;
    let y = &labels.y;
    let fold = assign_folds(y, spec)?;

    let per_fold: Vec<Vec<(usize, u8, f64, bool)>> = (0..spec.folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..y.len()).filter(|&i| fold[i] != f).collect();
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<u8> = train.iter().map(|&i| y[i]).collect();
            let test = (0..y.len()).filter(|&i| fold[i] == f);
            match classifier {
                ClassifierConfig::Knn(p) => test
                    .map(|i| {
                        let (prob, tied) = knn_predict(&tx, &ty, &x[i], p);
                        let pred = if tied { knn_tie_break(&tx, &ty, &x[i]) } else { u8::from(prob > 0.5) };
                        (i, pred, prob, tied)
                    })
                    .collect(),
                ClassifierConfig::RandomForest(p) => {
                    let forest = train_forest(&tx, &ty, p, f);
                    let majority = u8::from(2 * ty.iter().filter(|&&v| v == 1).count() > ty.len());
                    test.map(|i| {
                        let prob = forest.probability(&x[i]);
                        let tied = prob == 0.5;
                        let pred = if !tied {
                            u8::from(prob > 0.5)
                        } else {
                            let m = forest.mean_leaf_value(&x[i]);
                            if m == 0.5 {
                                majority
                            } else {
                                u8::from(m > 0.5)
                            }
                        };
                        (i, pred, prob, tied)
                    })
                    .collect()
                }
            }
        })
        .collect();

    let mut oof = OutOfFold {
        predicted: vec![0; y.len()],
        probability: vec![0.0; y.len()],
        tied: vec![false; y.len()],
    };
    for (i, pred, prob, tied) in per_fold.into_iter().flatten() {
        oof.predicted[i] = pred;
        oof.probability[i] = prob;
        oof.tied[i] = tied;
    }

    let zero_info = constant_columns(x, width);
    let mut flags = Vec::new();
    if !zero_info.is_empty() {
        flags.push(format!(
            "{} of {} features are constant and carry no information",
            zero_info.len(),
            width
        ));
    }
    let ties = oof.tied.iter().filter(|&&t| t).count();
    if ties > 0 {
        let rule = match classifier {
            ClassifierConfig::Knn(_) => "nearest neighbour's class",
            ClassifierConfig::RandomForest(_) => "mean leaf fraction, then training majority",
        };
        flags.push(format!("{ties} even votes broken by {rule}"));
    }
    cv::score(labels, &fold, spec, &oof, *classifier, width, zero_info, flags)
}

pub fn knn_classify(x: &[Vec<f64>], labels: &BinaryLabels, k: usize, spec: &FoldSpec) -> Result<CvReport> {
    cross_validate(x, labels, &ClassifierConfig::Knn(KnnParams { k }), spec)
}

pub fn random_forest_classify(
    x: &[Vec<f64>],
    labels: &BinaryLabels,
    trees: usize,
    spec: &FoldSpec,
    seed: u64,
) -> Result<CvReport> {
    let params = ForestParams {
        trees,
        seed,
        ..ForestParams::default()
    };
    cross_validate(x, labels, &ClassifierConfig::RandomForest(params), spec)
}

/// Same classifiers on the path-search features and on the direct-edge
/// features of the same entities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub closure: Closure,
    pub directedness: Directedness,
    pub transitive_closure: Vec<CvReport>,
    pub infobox_only: Vec<CvReport>,
    /// Transitive-closure AUROC minus infobox-only AUROC, per classifier.
    pub auroc_gap: Vec<f64>,
}

pub fn compare_modes(
    kb: &KnowledgeBase,
    entities: &[EntityId],
    labels: &BinaryLabels,
    targets: &[EntityId],
    closure: Closure,
    classifiers: &[ClassifierConfig],
    spec: &FoldSpec,
) -> Result<ModeComparison> {
    let tc = build_feature_matrix(kb, entities, targets, FeatureMode::TransitiveClosure, closure)?;
    let fb = build_feature_matrix(kb, entities, targets, FeatureMode::InfoboxOnly, closure)?;
    let run = |m: &FeatureMatrix| -> Result<Vec<CvReport>> {
        classifiers.iter().map(|c| cross_validate(&m.values, labels, c, spec)).collect()
    };
    let transitive_closure = run(&tc)?;
    let infobox_only = run(&fb)?;
    let auroc_gap = transitive_closure
        .iter()
        .zip(&infobox_only)
        .map(|(a, b)| a.aggregate.auroc - b.aggregate.auroc)
        .collect();
    Ok(ModeComparison {
        closure,
        directedness: kb.graph.directedness(),
        transitive_closure,
        infobox_only,
        auroc_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub entity: String,
    pub label: String,
    /// Partition of the roster (for instance a legislative chamber); each
    /// group is calibrated separately.
    pub group: Option<String>,
}

/// CSV with header `entity_name,label` and an optional `group` column.
pub fn load_roster<R: Read>(source: R) -> Result<Vec<RosterEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Record {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ei), Some(li)) = (col("entity_name"), col("label")) else {
        return Err(Error::Record {
            row: 1,
            message: "header must contain entity_name and label".into(),
        });
    };
    let gi = col("group");
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| Error::Record {
            row,
            message: e.to_string(),
        })?;
        let get = |j: usize| rec.get(j).unwrap_or_default();
        if get(ei).is_empty() || get(li).is_empty() {
            return Err(Error::Record {
                row,
                message: "empty entity_name or label".into(),
            });
        }
        out.push(RosterEntry {
            entity: get(ei).to_owned(),
            label: get(li).to_owned(),
            group: gi.map(get).filter(|g| !g.is_empty()).map(str::to_owned),
        });
    }
    if out.is_empty() {
        return Err(Error::validation("roster is empty"));
    }
    Ok(out)
}

/// Directed and undirected views of one graph. Entity ids agree between
/// them. An undirected-only graph cannot serve directed cells.
#[derive(Debug, Clone, Copy)]
pub struct GraphViews<'a> {
    pub directed: Option<&'a KnowledgeBase>,
    pub undirected: &'a KnowledgeBase,
}

impl<'a> GraphViews<'a> {
    pub fn view(&self, d: Directedness) -> Result<&'a KnowledgeBase> {
        match d {
            Directedness::Undirected => Ok(self.undirected),
            Directedness::Directed => self
                .directed
                .ok_or_else(|| Error::validation("the graph was built undirected; directed cells are unavailable")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRequest {
    pub roster: Vec<RosterEntry>,
    /// Concept whose neighbours become the feature columns.
    pub target_concept: String,
    /// Explicit feature columns; overrides `target_concept` when set.
    #[serde(default)]
    pub targets: Option<Vec<String>>,
    pub cells: Vec<(Closure, Directedness)>,
    pub classifiers: Vec<ClassifierConfig>,
    pub fold_spec: FoldSpec,
    pub resolve: ResolveOptions,
    pub min_resolved_fraction: f64,
    pub infobox_baseline: bool,
}

impl CalibrationRequest {
    pub fn new(roster: Vec<RosterEntry>) -> Self {
        Self {
            roster,
            target_concept: DEFAULT_TARGET_CONCEPT.to_owned(),
            targets: None,
            cells: vec![(Closure::Metric, Directedness::Undirected)],
            classifiers: ClassifierConfig::defaults(),
            fold_spec: FoldSpec::default(),
            resolve: ResolveOptions::default(),
            min_resolved_fraction: DEFAULT_MIN_RESOLVED_FRACTION,
            infobox_baseline: false,
        }
    }

    /// All four closure x directedness combinations.
    pub fn full_grid() -> Vec<(Closure, Directedness)> {
        let mut v = Vec::new();
        for d in [Directedness::Directed, Directedness::Undirected] {
            for c in [Closure::Metric, Closure::Ultrametric] {
                v.push((c, d));
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub closure: Closure,
    pub directedness: Directedness,
    pub mode: FeatureMode,
    pub group: Option<String>,
    pub n_rows: usize,
    pub results: Vec<CvReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub target_concept: Option<String>,
    pub targets: Vec<String>,
    /// Targets dropped because they are roster entities themselves.
    pub targets_overlapping_roster: Vec<String>,
    pub roster_size: usize,
    pub resolved: usize,
    pub unresolved: Vec<String>,
    pub groups: Vec<Option<String>>,
    pub fold_spec: FoldSpec,
    pub cells: Vec<GridCell>,
    pub infobox_baseline: Vec<GridCell>,
    /// Placeholder for an externally computed baseline score vector.
    pub external_baseline: Option<serde_json::Value>,
}

/// Runs every requested cell for every roster group. Unresolved roster
/// entries are reported and skipped as long as the resolved share reaches
/// `min_resolved_fraction`.
pub fn run_calibration(views: GraphViews<'_>, req: &CalibrationRequest) -> Result<CalibrationReport> {
    if req.cells.is_empty() || req.classifiers.is_empty() {
        return Err(Error::validation("calibration needs at least one cell and one classifier"));
    }
    if !(0.0..=1.0).contains(&req.min_resolved_fraction) {
        return Err(Error::validation("min_resolved_fraction must lie in [0, 1]"));
    }
    for c in &req.classifiers {
        c.validate()?;
    }
    for &(closure, d) in &req.cells {
        if closure == Closure::DirectOnly {
            return Err(Error::validation("grid cells use the metric or ultrametric closure"));
        }
        views.view(d)?;
    }
    let base = views.directed.unwrap_or(views.undirected);
    let dict = &base.dictionary;

    let names: Vec<&str> = req.roster.iter().map(|r| r.entity.as_str()).collect();
    let (found, unresolved) = resolve_partial(dict, &names, &req.resolve);
    let resolved = found.iter().filter(|f| f.is_some()).count();
    if (resolved as f64) < req.min_resolved_fraction * req.roster.len() as f64 {
        let hints = unresolved
            .iter()
            .flat_map(|m| suggestions(dict, m, &req.resolve))
            .take(10)
            .collect();
        return Err(Error::Unresolved {
            missing: unresolved,
            suggestions: hints,
        });
    }

    let targets = match &req.targets {
        Some(t) => resolve_all(dict, t, &req.resolve)?,
        None => discover_targets(base, &req.target_concept, &req.resolve)?,
    };
    let roster_ids: std::collections::HashSet<EntityId> = found.iter().flatten().copied().collect();
    let (targets, overlapping): (Vec<EntityId>, Vec<EntityId>) =
        targets.into_iter().partition(|t| !roster_ids.contains(t));
    if targets.is_empty() {
        return Err(Error::validation("no target concepts to build features from"));
    }

    let mut groups: Vec<Option<String>> = req.roster.iter().map(|r| r.group.clone()).collect();
    groups.sort();
    groups.dedup();

    let mut cells = Vec::new();
    let mut baseline = Vec::new();
    for group in &groups {
        let (ids, label_names): (Vec<EntityId>, Vec<&str>) = req
            .roster
            .iter()
            .zip(&found)
            .filter(|(r, f)| r.group == *group && f.is_some())
            .map(|(r, f)| (f.unwrap(), r.label.as_str()))
            .unzip();
        let labels = BinaryLabels::from_names(&label_names).map_err(|e| {
            Error::validation(format!("group {}: {e}", group.as_deref().unwrap_or("(all)")))
        })?;
        let run = |m: &FeatureMatrix| -> Result<Vec<CvReport>> {
            req.classifiers
                .iter()
                .map(|c| cross_validate(&m.values, &labels, c, &req.fold_spec))
                .collect()
        };
        for &(closure, d) in &req.cells {
            let kb = views.view(d)?;
            let m = build_feature_matrix(kb, &ids, &targets, FeatureMode::TransitiveClosure, closure)?;
            cells.push(GridCell {
                closure,
                directedness: d,
                mode: FeatureMode::TransitiveClosure,
                group: group.clone(),
                n_rows: ids.len(),
                results: run(&m)?,
            });
        }
        if req.infobox_baseline {
            let mut dirs: Vec<Directedness> = req.cells.iter().map(|c| c.1).collect();
            dirs.dedup();
            dirs.sort_by_key(|d| *d == Directedness::Undirected);
            dirs.dedup();
            for d in dirs {
                let m = build_feature_matrix(views.view(d)?, &ids, &targets, FeatureMode::InfoboxOnly, Closure::DirectOnly)?;
                baseline.push(GridCell {
                    closure: Closure::DirectOnly,
                    directedness: d,
                    mode: FeatureMode::InfoboxOnly,
                    group: group.clone(),
                    n_rows: ids.len(),
                    results: run(&m)?,
                });
            }
        }
    }

    Ok(CalibrationReport {
        target_concept: req.targets.is_none().then(|| req.target_concept.clone()),
        targets: targets.iter().map(|&t| base.name(t).to_owned()).collect(),
        targets_overlapping_roster: overlapping.iter().map(|&t| base.name(t).to_owned()).collect(),
        roster_size: req.roster.len(),
        resolved,
        unresolved,
        groups,
        fold_spec: req.fold_spec,
        cells,
        infobox_baseline: baseline,
        external_baseline: None,
    })
}
