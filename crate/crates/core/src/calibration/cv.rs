//! Stratified k-fold cross-validation and binary classification scores.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::auroc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub folds: usize,
    pub seed: u64,
}

impl Default for FoldSpec {
    fn default() -> Self {
        Self { folds: 10, seed: 42 }
    }
}

/// Binary labels with their class names. Class 1 is the positive class used
/// for probabilities and AUROC; it is the lexicographically larger name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryLabels {
    pub classes: [String; 2],
    pub y: Vec<u8>,
}

impl BinaryLabels {
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut distinct: Vec<&str> = names.iter().map(AsRef::as_ref).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != 2 {
            return Err(Error::validation(format!(
                "binary classification needs exactly two labels, found {}: {:?}",
                distinct.len(),
                distinct
            )));
        }
        let classes = [distinct[0].to_owned(), distinct[1].to_owned()];
        let y = names.iter().map(|n| u8::from(n.as_ref() == classes[1])).collect();
        Ok(Self { classes, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Fold index per row. Classes are shuffled separately and dealt round-robin
/// so every fold keeps the class balance; deterministic in `spec.seed`.
pub fn assign_folds(y: &[u8], spec: &FoldSpec) -> Result<Vec<usize>> {
    if spec.folds < 2 {
        return Err(Error::validation("need at least 2 folds"));
    }
    if y.len() < spec.folds {
        return Err(Error::validation(format!(
            "{} rows cannot fill {} folds",
            y.len(),
            spec.folds
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % spec.folds;
            next += 1;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub r#fn: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (0, 0) => c.tn += 1,
                _ => c.r#fn += 1,
            }
        }
        c
    }

    /// Harmonic mean of precision and recall for the positive class; `None`
    /// when the class is absent from both truth and predictions.
    pub fn f_score_positive(&self) -> Option<f64> {
        f_score(self.tp, self.fp, self.r#fn)
    }

    /// Same with the roles of the classes swapped.
    pub fn f_score_negative(&self) -> Option<f64> {
        f_score(self.tn, self.r#fn, self.fp)
    }

    /// Mean over the classes whose score is defined.
    pub fn f_score_macro(&self) -> f64 {
        let scores: Vec<f64> = [self.f_score_negative(), self.f_score_positive()].into_iter().flatten().collect();
        if scores.is_empty() {
            0.0
        } else {
            scores.iter().sum::<f64>() / scores.len() as f64
        }
    }
}

fn f_score(tp: usize, fp: usize, fn_: usize) -> Option<f64> {
    if tp + fp + fn_ == 0 {
        return None;
    }
    Some(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub n_test: usize,
    pub f_score_macro: f64,
    /// Absent when the test fold holds a single class.
    pub auroc: Option<f64>,
    pub single_class: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScore {
    /// Macro F over the pooled out-of-fold predictions.
    pub f_score_macro: f64,
    pub f_score_per_class: BTreeMap<String, f64>,
    /// AUROC of the pooled out-of-fold positive-class probabilities.
    pub auroc: f64,
    pub mean_fold_auroc: Option<f64>,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub classifier: super::ClassifierConfig,
    pub fold_spec: FoldSpec,
    pub classes: [String; 2],
    pub n_rows: usize,
    pub n_features: usize,
    pub folds: Vec<FoldScore>,
    pub aggregate: AggregateScore,
    /// Test rows whose vote was even and had to be broken.
    pub vote_ties: usize,
    /// Columns constant over all rows.
    pub zero_information_features: Vec<usize>,
    pub flags: Vec<String>,
}

/// Out-of-fold predictions for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct OutOfFold {
    pub predicted: Vec<u8>,
    pub probability: Vec<f64>,
    pub tied: Vec<bool>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn score(
    labels: &BinaryLabels,
    fold: &[usize],
    spec: &FoldSpec,
    oof: &OutOfFold,
    classifier: super::ClassifierConfig,
    n_features: usize,
    zero_information_features: Vec<usize>,
    mut flags: Vec<String>,
) -> Result<CvReport> {
    let y = &labels.y;
    let mut folds = Vec::with_capacity(spec.folds);
    for f in 0..spec.folds {
        let idx: Vec<usize> = (0..y.len()).filter(|&i| fold[i] == f).collect();
        let truth: Vec<u8> = idx.iter().map(|&i| y[i]).collect();
        let pred: Vec<u8> = idx.iter().map(|&i| oof.predicted[i]).collect();
        let pos: Vec<f64> = idx.iter().filter(|&&i| y[i] == 1).map(|&i| oof.probability[i]).collect();
        let neg: Vec<f64> = idx.iter().filter(|&&i| y[i] == 0).map(|&i| oof.probability[i]).collect();
        let single_class = pos.is_empty() || neg.is_empty();
        if single_class {
            flags.push(format!("fold {f} holds a single class; scored on the available class"));
        }
        folds.push(FoldScore {
            fold: f,
            n_test: idx.len(),
            f_score_macro: Confusion::from_predictions(&truth, &pred).f_score_macro(),
            auroc: if single_class { None } else { Some(auroc(&pos, &neg)?.auroc) },
            single_class,
        });
    }

    let confusion = Confusion::from_predictions(y, &oof.predicted);
    let mut per_class = BTreeMap::new();
    if let Some(f) = confusion.f_score_negative() {
        per_class.insert(labels.classes[0].clone(), f);
    }
    if let Some(f) = confusion.f_score_positive() {
        per_class.insert(labels.classes[1].clone(), f);
    }
    let pos: Vec<f64> = (0..y.len()).filter(|&i| y[i] == 1).map(|i| oof.probability[i]).collect();
    let neg: Vec<f64> = (0..y.len()).filter(|&i| y[i] == 0).map(|i| oof.probability[i]).collect();
    let fold_aurocs: Vec<f64> = folds.iter().filter_map(|f| f.auroc).collect();
    let aggregate = AggregateScore {
        f_score_macro: confusion.f_score_macro(),
        f_score_per_class: per_class,
        auroc: auroc(&pos, &neg)?.auroc,
        mean_fold_auroc: (!fold_aurocs.is_empty()).then(|| fold_aurocs.iter().sum::<f64>() / fold_aurocs.len() as f64),
        confusion,
    };
    Ok(CvReport {
        classifier,
        fold_spec: *spec,
        classes: labels.classes.clone(),
        n_rows: y.len(),
        n_features,
        folds,
        aggregate,
        vote_ties: oof.tied.iter().filter(|&&t| t).count(),
        zero_information_features,
        flags,
    })
}
