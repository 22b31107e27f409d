//! Random forest of unpruned Gini trees.
//!
//! Tree `t` draws all of its randomness (bootstrap sample and per-node
//! feature subsets) from a generator seeded with `(seed, t)`, so the forest
//! is the same whatever order the trees are grown in.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cart::{grow, CartConfig, CartModel};
use super::{check_trainable, LearnerError};
use crate::dataset::Dataset;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn per node; `None` means `floor(log2 F) + 1`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 100, mtry: None, bootstrap: true, seed: 0 }
    }
}

pub fn default_mtry(n_features: usize) -> usize {
    if n_features == 0 {
        return 1;
    }
    (n_features.ilog2() as usize + 1).min(n_features)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    n_classes: usize,
    trees: Vec<CartModel>,
}

impl ForestModel {
    pub fn trees(&self) -> &[CartModel] {
        &self.trees
    }

    /// Share of trees voting for each class.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.vote(row)] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.iter().map(|v| v / n).collect()
    }
}

pub fn train_forest(dataset: &Dataset, config: &ForestConfig) -> Result<ForestModel, LearnerError> {
    check_trainable(dataset)?;
    let n = dataset.len();
    let cart = CartConfig {
        mtry: Some(config.mtry.unwrap_or_else(|| default_mtry(dataset.schema.len()))),
        min_leaf: 1,
        max_depth: None,
    };
    let trees = (0..config.n_trees.max(1))
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded(config.seed, t as u64);
            let rows = if config.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            grow(dataset, rows, &cart, Some(&mut rng))
        })
        .collect();
    Ok(ForestModel { n_classes: dataset.n_classes(), trees })
}
