use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// Positive-class vote fraction among the k nearest training rows by
/// Euclidean distance. Equal distances are broken by training index; k is
/// clamped to the training size. Returns `(probability, tied_vote)`.
pub fn knn_predict(train_x: &[Vec<f64>], train_y: &[u8], query: &[f64], params: &KnnParams) -> (f64, bool) {
    let k = params.k.clamp(1, train_x.len().max(1));
    let mut d: Vec<(f64, usize)> = train_x
        .iter()
        .enumerate()
        .map(|(i, x)| (x.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let pos = d[..k].iter().filter(|&&(_, i)| train_y[i] == 1).count();
    (pos as f64 / k as f64, 2 * pos == k)
}

/// Label for a vote tie: the class of the nearest neighbour.
pub fn knn_tie_break(train_x: &[Vec<f64>], train_y: &[u8], query: &[f64]) -> u8 {
    let (p, _) = knn_predict(train_x, train_y, query, &KnnParams { k: 1 });
    u8::from(p > 0.5)
}
