//! Gain-ratio decision tree.
//!
//! Numeric features split in two at the midpoint between consecutive
//! distinct values (the threshold with the largest gain is that feature's
//! candidate); categorical features split into one branch per token. Among
//! candidates with positive gain, only those whose gain reaches the mean
//! gain compete, and the largest gain ratio wins. Trees are not pruned.

use serde::{Deserialize, Serialize};

use super::entropy::{score_split, SplitScore};
use super::{check_trainable, class_indices, normalized, LearnerError};
use crate::dataset::{Dataset, FeatureKind};

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Each numeric branch, and at least two categorical branches, must
    /// hold this many rows.
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { min_leaf: 2, max_depth: None }
    }
}

/// Nodes live in a flat list; children are indices into it. Internal nodes
/// keep their class distribution for rows carrying a token the tree never
/// saw at that node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { distribution: Vec<f64> },
    Numeric { feature: usize, threshold: f64, left: usize, right: usize, distribution: Vec<f64> },
    Categorical { feature: usize, children: Vec<usize>, distribution: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
}

impl TreeModel {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { distribution } => return distribution.clone(),
                TreeNode::Numeric { feature, threshold, left, right, .. } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Categorical { feature, children, distribution } => {
                    match children.get(row[*feature] as usize) {
                        Some(&child) => at = child,
                        None => return distribution.clone(),
                    }
                }
            }
        }
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0, 0)];
        while let Some((at, d)) = stack.pop() {
            best = best.max(d);
            match &self.nodes[at] {
                TreeNode::Leaf { .. } => {}
                TreeNode::Numeric { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
                TreeNode::Categorical { children, .. } => stack.extend(children.iter().map(|&c| (c, d + 1))),
            }
        }
        best
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Leaf { .. } => None,
                TreeNode::Numeric { feature, .. } | TreeNode::Categorical { feature, .. } => Some(*feature),
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

enum Chosen {
    Numeric { feature: usize, threshold: f64 },
    Categorical { feature: usize },
}

struct Scored {
    chosen: Chosen,
    score: SplitScore,
}

pub fn train_tree(dataset: &Dataset, config: &TreeConfig) -> Result<TreeModel, LearnerError> {
    check_trainable(dataset)?;
    let labels = class_indices(dataset);
    let m = dataset.n_classes();
    let min_leaf = config.min_leaf.max(1);
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { distribution: vec![] }];
    let mut work = vec![(0usize, (0..dataset.len()).collect::<Vec<usize>>(), 0usize)];

    while let Some((id, rows, depth)) = work.pop() {
        let counts = count(&labels, &rows, m);
        let distribution = normalized(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let capped = config.max_depth.is_some_and(|d| depth >= d);
        let best = if pure || capped || rows.len() < 2 * min_leaf {
            None
        } else {
            best_split(dataset, &labels, &rows, &counts, min_leaf)
        };
        let Some(best) = best else {
            nodes[id] = TreeNode::Leaf { distribution };
            continue;
        };
        match best.chosen {
            Chosen::Numeric { feature, threshold } => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| dataset.samples[i].values[feature] <= threshold);
                let (left, right) = (nodes.len(), nodes.len() + 1);
                nodes.push(TreeNode::Leaf { distribution: vec![] });
                nodes.push(TreeNode::Leaf { distribution: vec![] });
                work.push((right, r, depth + 1));
                work.push((left, l, depth + 1));
                nodes[id] = TreeNode::Numeric { feature, threshold, left, right, distribution };
            }
            Chosen::Categorical { feature } => {
                let k = dataset.schema.features[feature].tokens().len();
                let mut groups = vec![Vec::new(); k];
                for &i in &rows {
                    // Training rows always carry a known token.
                    groups[dataset.samples[i].values[feature] as usize].push(i);
                }
                let mut children = Vec::with_capacity(k);
                for g in groups {
                    let child = nodes.len();
                    children.push(child);
                    if g.is_empty() {
                        nodes.push(TreeNode::Leaf { distribution: distribution.clone() });
                    } else {
                        nodes.push(TreeNode::Leaf { distribution: vec![] });
                        work.push((child, g, depth + 1));
                    }
                }
                nodes[id] = TreeNode::Categorical { feature, children, distribution };
            }
        }
    }
    Ok(TreeModel { nodes })
}

fn count(labels: &[usize], rows: &[usize], m: usize) -> Vec<usize> {
    let mut c = vec![0; m];
    for &r in rows {
        c[labels[r]] += 1;
    }
    c
}

fn best_split(
    dataset: &Dataset,
    labels: &[usize],
    rows: &[usize],
    parent: &[usize],
    min_leaf: usize,
) -> Option<Scored> {
    let m = parent.len();
    let mut candidates = Vec::new();
    for (feature, f) in dataset.schema.features.iter().enumerate() {
        let found = match &f.kind {
            FeatureKind::Numeric => best_threshold(dataset, labels, rows, parent, feature, min_leaf)
                .map(|(threshold, score)| Scored { chosen: Chosen::Numeric { feature, threshold }, score }),
            FeatureKind::Categorical { tokens } => {
                let mut by_token = vec![vec![0; m]; tokens.len()];
                for &r in rows {
                    by_token[dataset.samples[r].values[feature] as usize][labels[r]] += 1;
                }
                by_token.retain(|c| c.iter().any(|&x| x > 0));
                let big = by_token.iter().filter(|c| c.iter().sum::<usize>() >= min_leaf).count();
                if big < 2 {
                    None
                } else {
                    score_split(parent, &by_token)
                        .ok()
                        .map(|score| Scored { chosen: Chosen::Categorical { feature }, score })
                }
            }
        };
        if let Some(s) = found.filter(|s| s.score.gain > MIN_GAIN) {
            candidates.push(s);
        }
    }
    if candidates.is_empty() {
        return None;
    }
    let mean_gain = candidates.iter().map(|c| c.score.gain).sum::<f64>() / candidates.len() as f64;
    let mut best: Option<Scored> = None;
    for c in candidates {
        if c.score.gain + 1e-12 < mean_gain {
            continue;
        }
        if best.as_ref().is_none_or(|b| c.score.gain_ratio > b.score.gain_ratio) {
            best = Some(c);
        }
    }
    best
}

/// Highest-gain midpoint threshold with `min_leaf` rows on each side.
fn best_threshold(
    dataset: &Dataset,
    labels: &[usize],
    rows: &[usize],
    parent: &[usize],
    feature: usize,
    min_leaf: usize,
) -> Option<(f64, SplitScore)> {
    let mut sorted: Vec<(f64, usize)> = rows.iter().map(|&r| (dataset.samples[r].values[feature], labels[r])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let mut left = vec![0; parent.len()];
    let mut right = parent.to_vec();
    let mut best: Option<(f64, SplitScore)> = None;
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
        let Ok(score) = score_split(parent, &[left.clone(), right.clone()]) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| score.gain > b.gain) {
            best = Some((threshold, score));
        }
    }
    best
}
