use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores >= threshold are called positive. `None` for the origin.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    pub points: Vec<RocPoint>,
    pub auroc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl RocReport {
    /// Area under the piecewise-linear curve through `points`.
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr,threshold\n");
        for p in &self.points {
            let threshold = p.threshold.map_or_else(|| "inf".to_owned(), |t| format!("{t:.10}"));
            out.push_str(&format!("{:.10},{:.10},{threshold}\n", p.fpr, p.tpr));
        }
        out
    }
}

fn check_scores(scores: &[f64], side: &str) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::validation(format!("no {side} scores; AUROC needs both classes")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::validation(format!("NaN among {side} scores")));
    }
    Ok(())
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half, plus the ROC curve from a threshold sweep in which equal
/// scores form a single step.
pub fn auroc(pos: &[f64], neg: &[f64]) -> Result<RocReport> {
    check_scores(pos, "positive")?;
    check_scores(neg, "negative")?;

    let mut sorted_neg = neg.to_vec();
    sorted_neg.sort_by(f64::total_cmp);
    let mut wins = 0.0f64;
    for &p in pos {
        let below = sorted_neg.partition_point(|&n| n < p);
        let not_above = sorted_neg.partition_point(|&n| n <= p);
        wins += below as f64 + 0.5 * (not_above - below) as f64;
    }
    let auroc = wins / (pos.len() as f64 * neg.len() as f64);

    let mut merged: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    merged.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < merged.len() {
        let threshold = merged[i].0;
        while i < merged.len() && merged[i].0 == threshold {
            if merged[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / nn,
            tpr: tp as f64 / np,
            threshold: Some(threshold),
        });
    }

    Ok(RocReport {
        points,
        auroc,
        n_pos: pos.len(),
        n_neg: neg.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated() {
        assert_eq!(auroc(&[0.9, 0.8], &[0.7, 0.1]).unwrap().auroc, 1.0);
    }

    #[test]
    fn three_of_four_pairs() {
        // pairs (0.8>0.6) (0.8>0.2) (0.4<0.6) (0.4>0.2)
        let r = auroc(&[0.8, 0.4], &[0.6, 0.2]).unwrap();
        assert_eq!(r.auroc, 0.75);
        assert!((r.trapezoid_area() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn all_ties_half_credit() {
        let r = auroc(&[0.5], &[0.5]).unwrap();
        assert_eq!(r.auroc, 0.5);
        assert_eq!(r.points.len(), 2);
        assert!((r.trapezoid_area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_side_rejected() {
        assert!(auroc(&[], &[0.1]).is_err());
        assert!(auroc(&[0.1], &[]).is_err());
        assert!(auroc(&[f64::NAN], &[0.1]).is_err());
    }

    #[test]
    fn endpoints_and_csv() {
        let r = auroc(&[0.3, 0.9, 0.3], &[0.3, 0.1]).unwrap();
        let first = r.points.first().unwrap();
        let last = r.points.last().unwrap();
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        assert!(r.points.windows(2).all(|w| w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr));
        let csv = r.to_csv();
        assert!(csv.starts_with("fpr,tpr,threshold\n0.0000000000,0.0000000000,inf\n"));
        assert_eq!(csv.lines().count(), 1 + r.points.len());
    }
}
