//! Information measures used by the gain-ratio tree.

use serde::{Deserialize, Serialize};

use super::LearnerError;
use crate::dataset::Dataset;

/// Shannon entropy in bits of a class-count vector, with 0 log 0 = 0.
pub fn entropy(counts: &[usize]) -> Result<f64, LearnerError> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(LearnerError::AllZero);
    }
    Ok(entropy_of(counts, total))
}

pub(crate) fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
}

/// Gain, split information and gain ratio of partitioning `parent` into
/// `children` (class-count vectors that sum to the parent).
pub fn score_split(parent: &[usize], children: &[Vec<usize>]) -> Result<SplitScore, LearnerError> {
    let total: usize = parent.iter().sum();
    if total == 0 {
        return Err(LearnerError::AllZero);
    }
    let sizes: Vec<usize> = children.iter().map(|c| c.iter().sum()).collect();
    if children.len() < 2 || sizes.contains(&0) {
        return Err(LearnerError::DegenerateSplit);
    }
    let n = total as f64;
    let weighted: f64 = children.iter().zip(&sizes).map(|(c, &s)| s as f64 / n * entropy_of(c, s)).sum();
    let split_info: f64 = sizes
        .iter()
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.log2()
        })
        .sum();
    if split_info <= 0.0 {
        return Err(LearnerError::DegenerateSplit);
    }
    let gain = entropy_of(parent, total) - weighted;
    Ok(SplitScore { gain, split_info, gain_ratio: gain / split_info })
}

/// A candidate partition of a node's rows on one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Candidate {
    /// Numeric: `value <= threshold` versus the rest.
    Threshold(f64),
    /// Categorical: one subset per token present at the node.
    Tokens,
}

/// Scores `candidate` on `feature` over the rows `rows` of `dataset`.
pub fn gain_and_ratio(
    dataset: &Dataset,
    rows: &[usize],
    feature: usize,
    candidate: Candidate,
) -> Result<SplitScore, LearnerError> {
    let m = dataset.n_classes();
    let mut parent = vec![0; m];
    let children = match candidate {
        Candidate::Threshold(t) => {
            let mut sides = vec![vec![0; m]; 2];
            for &r in rows {
                let s = &dataset.samples[r];
                parent[s.class_index()] += 1;
                sides[usize::from(s.values[feature] > t)][s.class_index()] += 1;
            }
            sides
        }
        Candidate::Tokens => {
            let k = dataset.schema.features[feature].tokens().len() + 1;
            let mut by_token = vec![vec![0; m]; k];
            for &r in rows {
                let s = &dataset.samples[r];
                parent[s.class_index()] += 1;
                by_token[(s.values[feature] as usize).min(k - 1)][s.class_index()] += 1;
            }
            by_token.retain(|c| c.iter().any(|&x| x > 0));
            by_token
        }
    };
    score_split(&parent, &children)
}
