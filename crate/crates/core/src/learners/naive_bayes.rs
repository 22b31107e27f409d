//! Naive Bayes with Gaussian numeric and Laplace-smoothed categorical
//! likelihoods, scored in log space.
//!
//! The model stores counts and moments rather than logarithms so that a
//! class absent from training (probability 0) serializes cleanly. Tokens
//! never seen in training contribute nothing to any class.

use serde::{Deserialize, Serialize};

use super::{check_trainable, LearnerError};
use crate::dataset::{Dataset, FeatureKind};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesConfig {
    pub laplace: f64,
}

impl Default for NaiveBayesConfig {
    fn default() -> Self {
        NaiveBayesConfig { laplace: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Likelihood {
    /// Per class: mean and variance (already floored).
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// Per class: count of each token.
    Categorical { counts: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    laplace: f64,
    class_counts: Vec<f64>,
    likelihoods: Vec<Likelihood>,
}

impl NaiveBayesModel {
    /// Unnormalized log posterior per class; `-inf` for untrained classes.
    pub fn log_scores(&self, row: &[f64]) -> Vec<f64> {
        let total: f64 = self.class_counts.iter().sum();
        (0..self.class_counts.len())
            .map(|c| {
                let n_c = self.class_counts[c];
                if n_c == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let mut score = (n_c / total).ln();
                for (j, lk) in self.likelihoods.iter().enumerate() {
                    score += match lk {
                        Likelihood::Gaussian { mean, var } => {
                            let d = row[j] - mean[c];
                            -0.5 * (2.0 * std::f64::consts::PI * var[c]).ln() - d * d / (2.0 * var[c])
                        }
                        Likelihood::Categorical { counts } => {
                            let k = counts[c].len();
                            match counts[c].get(row[j] as usize) {
                                Some(&x) => ((x + self.laplace) / (n_c + self.laplace * k as f64)).ln(),
                                None => 0.0,
                            }
                        }
                    };
                }
                score
            })
            .collect()
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let scores = self.log_scores(row);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        exp.iter().map(|e| e / total).collect()
    }
}

pub fn train_naive_bayes(dataset: &Dataset, config: &NaiveBayesConfig) -> Result<NaiveBayesModel, LearnerError> {
    check_trainable(dataset)?;
    let m = dataset.n_classes();
    let mut class_counts = vec![0.0; m];
    for s in &dataset.samples {
        class_counts[s.class_index()] += 1.0;
    }
    let likelihoods = dataset
        .schema
        .features
        .iter()
        .enumerate()
        .map(|(j, f)| match &f.kind {
            FeatureKind::Numeric => {
                let mut sum = vec![0.0; m];
                for s in &dataset.samples {
                    sum[s.class_index()] += s.values[j];
                }
                let mean: Vec<f64> =
                    sum.iter().zip(&class_counts).map(|(s, n)| if *n > 0.0 { s / n } else { 0.0 }).collect();
                let mut sq = vec![0.0; m];
                for s in &dataset.samples {
                    let c = s.class_index();
                    sq[c] += (s.values[j] - mean[c]).powi(2);
                }
                let var = sq
                    .iter()
                    .zip(&class_counts)
                    .map(|(q, n)| if *n > 0.0 { (q / n).max(VARIANCE_FLOOR) } else { 1.0 })
                    .collect();
                Likelihood::Gaussian { mean, var }
            }
            FeatureKind::Categorical { tokens } => {
                let mut counts = vec![vec![0.0; tokens.len()]; m];
                for s in &dataset.samples {
                    if let Some(x) = counts[s.class_index()].get_mut(s.values[j] as usize) {
                        *x += 1.0;
                    }
                }
                Likelihood::Categorical { counts }
            }
        })
        .collect();
    Ok(NaiveBayesModel { laplace: config.laplace, class_counts, likelihoods })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::testutil::dataset;
    use crate::dataset::Feature;

    #[test]
    fn prior_only() {
        let d = dataset(vec![], 2, vec![(vec![], 1), (vec![], 1), (vec![], 2)]);
        let m = train_naive_bayes(&d, &NaiveBayesConfig::default()).unwrap();
        let p = m.predict_proba(&[]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn untrained_class_gets_zero() {
        let d = dataset(vec![Feature::numeric("x")], 3, vec![(vec![0.0], 1), (vec![1.0], 2)]);
        let m = train_naive_bayes(&d, &NaiveBayesConfig::default()).unwrap();
        let p = m.predict_proba(&[0.5]);
        assert_eq!(p[2], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_token_is_ignored() {
        let f = Feature::categorical("t", vec!["a".into(), "b".into()]);
        let d = dataset(vec![f], 2, vec![(vec![0.0], 1), (vec![0.0], 1), (vec![1.0], 2)]);
        let m = train_naive_bayes(&d, &NaiveBayesConfig::default()).unwrap();
        let p = m.predict_proba(&[2.0]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
    }
}
