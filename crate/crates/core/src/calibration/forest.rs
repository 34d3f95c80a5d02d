use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per split; `None` means the square root of the count.
    pub max_features: Option<usize>,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_features: None,
            max_depth: None,
            min_leaf: 1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        positive: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Positive fraction of the training rows in the leaf reached by `x`.
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { positive } => return positive,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// 1 for a positive majority, 0 for negative, one half for an even leaf.
    pub fn vote(&self, x: &[f64]) -> f64 {
        let p = self.leaf_value(x);
        if p > 0.5 {
            1.0
        } else if p < 0.5 {
            0.0
        } else {
            0.5
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Fraction of trees voting positive.
    pub fn probability(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.vote(x)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean leaf fraction, used to break even votes.
    pub fn mean_leaf_value(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.leaf_value(x)).sum::<f64>() / self.trees.len() as f64
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of tree `tree` trained for fold `fold`.
pub fn tree_seed(seed: u64, fold: usize, tree: usize) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ fold as u64) ^ tree as u64)
}

/// Trains `params.trees` bootstrapped trees in parallel. The result depends
/// only on the inputs, `params.seed` and `fold`.
pub fn train_forest(x: &[Vec<f64>], y: &[u8], params: &ForestParams, fold: usize) -> Forest {
    let trees = (0..params.trees.max(1))
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, fold, t));
            let sample: Vec<usize> = (0..x.len()).map(|_| rng.random_range(0..x.len())).collect();
            train_tree(x, y, sample, params, &mut rng)
        })
        .collect();
    Forest { trees }
}

pub fn train_tree(x: &[Vec<f64>], y: &[u8], sample: Vec<usize>, params: &ForestParams, rng: &mut ChaCha8Rng) -> Tree {
    let n_features = x.first().map_or(0, Vec::len);
    let mtry = params
        .max_features
        .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
        .clamp(1, n_features.max(1));
    let mut builder = TreeBuilder {
        x,
        y,
        params,
        mtry,
        n_features,
        nodes: Vec::new(),
    };
    builder.grow(sample, 0, rng);
    Tree { nodes: builder.nodes }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    params: &'a ForestParams,
    mtry: usize,
    n_features: usize,
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let id = self.nodes.len();
        let pos = rows.iter().filter(|&&i| self.y[i] == 1).count();
        let positive = if rows.is_empty() { 0.5 } else { pos as f64 / rows.len() as f64 };
        self.nodes.push(Node::Leaf { positive });
        let pure = pos == 0 || pos == rows.len();
        let depth_done = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_done || rows.len() < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let Some(best) = self.best_split(&rows, pos, rng) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][best.feature] <= best.threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Visits features in random order. After `mtry` features the search
    /// stops as soon as a valid split is known; constant features do not
    /// count toward a valid split, so a node only becomes a leaf when no
    /// feature separates its rows.
    fn best_split(&self, rows: &[usize], pos: usize, rng: &mut ChaCha8Rng) -> Option<Candidate> {
        let mut order: Vec<usize> = (0..self.n_features).collect();
        order.shuffle(rng);
        let n = rows.len() as f64;
        let parent = gini(pos as f64, n);
        let mut best: Option<Candidate> = None;
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
        for (visited, &f) in order.iter().enumerate() {
            if visited >= self.mtry && best.is_some() {
                break;
            }
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.x[i][f], self.y[i])));
            sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0.0;
            let min_leaf = self.params.min_leaf.max(1);
            for k in 1..sorted.len() {
                left_pos += f64::from(sorted[k - 1].1);
                if sorted[k - 1].0 == sorted[k].0 || k < min_leaf || sorted.len() - k < min_leaf {
                    continue;
                }
                let nl = k as f64;
                let nr = n - nl;
                let impurity = (nl * gini(left_pos, nl) + nr * gini(pos as f64 - left_pos, nr)) / n;
                if impurity < parent - 1e-15 && best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let threshold = sorted[k - 1].0 + (sorted[k].0 - sorted[k - 1].0) / 2.0;
                    best = Some(Candidate {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }
}

fn gini(pos: f64, n: f64) -> f64 {
    let p = pos / n;
    2.0 * p * (1.0 - p)
}
