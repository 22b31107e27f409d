use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset::Dataset;
use crate::learners::TrainedModel;

/// Entry `(i, j)` counts rows of true class `i + 1` predicted as `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn from_labels(n_classes: usize, truth: &[u8], predicted: &[u8]) -> Result<Self, EvalError> {
        if truth.len() != predicted.len() {
            return Err(EvalError::ShapeMismatch(format!("{} labels, {} predictions", truth.len(), predicted.len())));
        }
        let mut counts = vec![vec![0; n_classes]; n_classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            let (t, p) = (usize::from(t), usize::from(p));
            if t == 0 || p == 0 || t > n_classes || p > n_classes {
                return Err(EvalError::ShapeMismatch(format!("class outside 1..={n_classes}")));
            }
            counts[t - 1][p - 1] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> usize {
        self.counts.iter().map(|r| r[class]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let hit: usize = (0..self.n_classes()).map(|i| self.counts[i][i]).sum();
        hit as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auroc: f64,
    pub rmse: f64,
}

impl MetricSet {
    pub const NAMES: [&'static str; 6] = ["accuracy", "precision", "recall", "f1", "auroc", "rmse"];

    pub fn values(&self) -> [f64; 6] {
        [self.accuracy, self.precision, self.recall, self.f1, self.auroc, self.rmse]
    }
}

/// Predicts every test row; returns predicted classes and probabilities.
pub fn predict_all(model: &TrainedModel, test: &Dataset) -> Result<(Vec<u8>, Vec<Vec<f64>>), EvalError> {
    model.check_schema(&test.schema)?;
    let mut classes = Vec::with_capacity(test.len());
    let mut probs = Vec::with_capacity(test.len());
    for s in &test.samples {
        let p = model.predict(&s.values)?;
        classes.push(p.class);
        probs.push(p.probabilities);
    }
    Ok((classes, probs))
}

pub fn confusion(model: &TrainedModel, test: &Dataset) -> Result<ConfusionMatrix, EvalError> {
    let (pred, _) = predict_all(model, test)?;
    let truth: Vec<u8> = test.samples.iter().map(|s| s.label).collect();
    ConfusionMatrix::from_labels(test.n_classes(), &truth, &pred)
}

/// Area under the ROC curve by the Mann-Whitney statistic, tied scores
/// counting one half. `None` without both positives and negatives.
pub fn binary_auroc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Support-weighted precision, recall, F1 and one-vs-rest AUROC, plus
/// accuracy and RMSE over every (row, class) probability residual.
pub fn metrics(cm: &ConfusionMatrix, probs: &[Vec<f64>], truth: &[u8]) -> Result<MetricSet, EvalError> {
    let m = cm.n_classes();
    let n = truth.len();
    if probs.len() != n || cm.total() != n || probs.iter().any(|p| p.len() != m) || n == 0 {
        return Err(EvalError::ShapeMismatch(format!(
            "{n} labels, {} probability rows, confusion total {}, {m} classes",
            probs.len(),
            cm.total()
        )));
    }
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..m {
        let support = cm.support(c);
        if support == 0 {
            continue;
        }
        let w = support as f64 / n as f64;
        let tp = cm.counts[c][c] as f64;
        let pred = cm.predicted(c);
        let p = if pred > 0 { tp / pred as f64 } else { 0.0 };
        let r = tp / support as f64;
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        precision += w * p;
        recall += w * r;
        f1 += w * f;
    }

    let (mut auc_sum, mut auc_weight) = (0.0, 0usize);
    for c in 0..m {
        let positive: Vec<bool> = truth.iter().map(|&t| usize::from(t) == c + 1).collect();
        let scores: Vec<f64> = probs.iter().map(|p| p[c]).collect();
        if let Some(a) = binary_auroc(&scores, &positive) {
            let support = cm.support(c);
            auc_sum += a * support as f64;
            auc_weight += support;
        }
    }
    let auroc = if auc_weight > 0 { auc_sum / auc_weight as f64 } else { 0.5 };

    let mut sq = 0.0;
    for (p, &t) in probs.iter().zip(truth) {
        for (c, &pc) in p.iter().enumerate() {
            let y = if usize::from(t) == c + 1 { 1.0 } else { 0.0 };
            sq += (pc - y) * (pc - y);
        }
    }
    let rmse = (sq / (n * m) as f64).sqrt();
    Ok(MetricSet { accuracy: cm.accuracy(), precision, recall, f1, auroc, rmse })
}
