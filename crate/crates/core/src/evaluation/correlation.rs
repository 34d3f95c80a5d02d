//! Spearman rho and Kendall tau-b with asymptotic normal p-values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub value: f64,
    /// Two-sided, normal approximation.
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub spearman_rho: Coefficient,
    pub kendall_tau_b: Coefficient,
    pub n: usize,
}

fn two_sided_normal_p(z: f64) -> f64 {
    if !z.is_finite() {
        return if z.is_nan() { 1.0 } else { 0.0 };
    }
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::validation(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::validation("rank correlation needs at least two observations"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::validation("NaN in correlation input"));
    }
    Ok(())
}

/// 1-based ranks, ties receiving the average of the ranks they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Coefficient> {
    check_pair(x, y)?;
    let rho = pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::validation("Spearman rho undefined for constant input"))?;
    let z = rho * ((x.len() - 1) as f64).sqrt();
    Ok(Coefficient {
        value: rho,
        p_value: two_sided_normal_p(z),
    })
}

/// Tie-group statistics over a sorted slice: (Σ t(t-1)/2, Σ t(t-1)(t-2), Σ t(t-1)(2t+5)).
fn tie_stats(sorted: &[f64]) -> (f64, f64, f64) {
    let (mut pairs, mut t2, mut t5) = (0.0, 0.0, 0.0);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        pairs += t * (t - 1.0) / 2.0;
        t2 += t * (t - 1.0) * (t - 2.0);
        t5 += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    (pairs, t2, t5)
}

/// Counts inversions while merge-sorting `v`.
fn sort_counting_swaps(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_counting_swaps(&mut v[..mid], &mut buf[..mid]);
    swaps += sort_counting_swaps(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Knight's O(n log n) tau-b.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<Coefficient> {
    check_pair(x, y)?;
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    // joint ties (same x and same y)
    let mut joint = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[order[j]] == x[order[i]] && y[order[j]] == y[order[i]] {
            j += 1;
        }
        let t = (j - i) as f64;
        joint += t * (t - 1.0) / 2.0;
        i = j;
    }
    let xs: Vec<f64> = order.iter().map(|&k| x[k]).collect();
    let (x_ties, x_t2, x_t5) = tie_stats(&xs);

    let mut ys: Vec<f64> = order.iter().map(|&k| y[k]).collect();
    let mut buf = vec![0.0; n];
    let swaps = sort_counting_swaps(&mut ys, &mut buf) as f64;
    let (y_ties, y_t2, y_t5) = tie_stats(&ys);

    let total = (n * (n - 1) / 2) as f64;
    // concordant - discordant
    let s = total - x_ties - y_ties + joint - 2.0 * swaps;
    let denom = ((total - x_ties) * (total - y_ties)).sqrt();
    if denom == 0.0 {
        return Err(Error::validation("Kendall tau-b undefined for constant input"));
    }
    let tau = (s / denom).clamp(-1.0, 1.0);

    let nf = n as f64;
    let m = nf * (nf - 1.0);
    let mut var = (m * (2.0 * nf + 5.0) - x_t5 - y_t5) / 18.0 + (2.0 * x_ties * y_ties) / m;
    if n > 2 {
        var += x_t2 * y_t2 / (9.0 * m * (nf - 2.0));
    }
    let p_value = if var > 0.0 { two_sided_normal_p(s / var.sqrt()) } else { 1.0 };
    Ok(Coefficient { value: tau, p_value })
}

pub fn correlate(scores: &[f64], ratings: &[f64]) -> Result<CorrelationReport> {
    Ok(CorrelationReport {
        spearman_rho: spearman(scores, ratings)?,
        kendall_tau_b: kendall_tau_b(scores, ratings)?,
        n: scores.len(),
    })
}
