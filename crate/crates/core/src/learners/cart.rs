//! Binary Gini trees: the forest's base learner, also usable alone.
//!
//! Numeric features split at midpoints between consecutive distinct
//! values; categorical features split one token against the rest. A node
//! splits whenever some candidate partitions it (even with zero impurity
//! decrease) and stops when pure or unsplittable. Ties go to the lowest
//! feature index, then the lowest threshold or token.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_trainable, class_indices, normalized, LearnerError};
use crate::dataset::{Dataset, FeatureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartConfig {
    /// Features drawn per node; `None` considers all of them.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for CartConfig {
    fn default() -> Self {
        CartConfig { mtry: None, min_leaf: 1, max_depth: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CartNode {
    Leaf {
        distribution: Vec<f64>,
    },
    Numeric {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Rows whose token equals `token` go left.
    Equals {
        feature: usize,
        token: usize,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartModel {
    nodes: Vec<CartNode>,
}

impl CartModel {
    pub fn nodes(&self) -> &[CartNode] {
        &self.nodes
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                CartNode::Leaf { distribution } => return distribution.clone(),
                CartNode::Numeric { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
                CartNode::Equals { feature, token, left, right } => {
                    at = if row[*feature] as usize == *token { *left } else { *right };
                }
            }
        }
    }

    /// 0-based class of the leaf a row reaches, lowest class on ties.
    pub fn vote(&self, row: &[f64]) -> usize {
        super::argmax(&self.predict_proba(row))
    }
}

pub fn train_cart(dataset: &Dataset, config: &CartConfig) -> Result<CartModel, LearnerError> {
    check_trainable(dataset)?;
    Ok(grow(dataset, (0..dataset.len()).collect(), config, None))
}

enum Split {
    Numeric { feature: usize, threshold: f64 },
    Equals { feature: usize, token: usize },
}

/// Grows a tree on `rows` (which may repeat, for bootstrap samples). The
/// generator is only drawn from when `mtry` is below the feature count.
pub(crate) fn grow(
    dataset: &Dataset,
    rows: Vec<usize>,
    config: &CartConfig,
    mut rng: Option<&mut ChaCha8Rng>,
) -> CartModel {
    let labels = class_indices(dataset);
    let m = dataset.n_classes();
    let f = dataset.schema.len();
    let mtry = config.mtry.unwrap_or(f).clamp(1, f.max(1));
    let min_leaf = config.min_leaf.max(1);
    let mut nodes = vec![CartNode::Leaf { distribution: vec![] }];
    let mut work = vec![(0usize, rows, 0usize)];
    let mut order: Vec<usize> = (0..f).collect();

    while let Some((id, rows, depth)) = work.pop() {
        let mut counts = vec![0usize; m];
        for &r in &rows {
            counts[labels[r]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let capped = config.max_depth.is_some_and(|d| depth >= d);
        let mut split = None;
        if !pure && !capped && rows.len() >= 2 * min_leaf {
            if mtry < f {
                let rng = rng.as_deref_mut().expect("feature sampling needs a generator");
                order.shuffle(rng);
            }
            for chunk in order.chunks(mtry) {
                let mut features = chunk.to_vec();
                features.sort_unstable();
                split = best_split(dataset, &labels, &rows, &counts, &features, min_leaf);
                if split.is_some() {
                    break;
                }
            }
        }
        let Some(split) = split else {
            let distribution = normalized(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
            nodes[id] = CartNode::Leaf { distribution };
            continue;
        };
        let goes_left = |r: usize| {
            let v = dataset.samples[r].values[match split {
                Split::Numeric { feature, .. } | Split::Equals { feature, .. } => feature,
            }];
            match split {
                Split::Numeric { threshold, .. } => v <= threshold,
                Split::Equals { token, .. } => v as usize == token,
            }
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| goes_left(i));
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(CartNode::Leaf { distribution: vec![] });
        nodes.push(CartNode::Leaf { distribution: vec![] });
        work.push((right, r, depth + 1));
        work.push((left, l, depth + 1));
        nodes[id] = match split {
            Split::Numeric { feature, threshold } => CartNode::Numeric { feature, threshold, left, right },
            Split::Equals { feature, token } => CartNode::Equals { feature, token, left, right },
        };
    }
    CartModel { nodes }
}

/// Sum over both children of `n_child * gini(child)`; lower is better.
fn weighted_gini(left: &[usize], nl: usize, right: &[usize], nr: usize) -> f64 {
    let part = |c: &[usize], n: usize| {
        let n = n as f64;
        n - c.iter().map(|&x| (x * x) as f64).sum::<f64>() / n
    };
    part(left, nl) + part(right, nr)
}

fn best_split(
    dataset: &Dataset,
    labels: &[usize],
    rows: &[usize],
    parent: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    let m = parent.len();
    let mut best: Option<(f64, Split)> = None;
    let mut offer = |score: f64, split: Split| {
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, split));
        }
    };
    for &feature in features {
        match &dataset.schema.features[feature].kind {
            FeatureKind::Numeric => {
                let mut sorted: Vec<(f64, usize)> =
                    rows.iter().map(|&r| (dataset.samples[r].values[feature], labels[r])).collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = vec![0; m];
                let mut right = parent.to_vec();
                for i in 0..n - 1 {
                    let (v, c) = sorted[i];
                    left[c] += 1;
                    right[c] -= 1;
                    let next = sorted[i + 1].0;
                    if next <= v || i + 1 < min_leaf || n - i - 1 < min_leaf {
                        continue;
                    }
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    offer(weighted_gini(&left, i + 1, &right, n - i - 1), Split::Numeric { feature, threshold });
                }
            }
            FeatureKind::Categorical { tokens } => {
                let mut by_token = vec![vec![0; m]; tokens.len()];
                for &r in rows {
                    by_token[dataset.samples[r].values[feature] as usize][labels[r]] += 1;
                }
                for (token, inside) in by_token.iter().enumerate() {
                    let nl: usize = inside.iter().sum();
                    if nl < min_leaf || n - nl < min_leaf {
                        continue;
                    }
                    let outside: Vec<usize> = parent.iter().zip(inside).map(|(p, i)| p - i).collect();
                    offer(weighted_gini(inside, nl, &outside, n - nl), Split::Equals { feature, token });
                }
            }
        }
    }
    best.map(|(_, s)| s)
}
