//! One-vs-one RBF support vector machines trained with SMO.
//!
//! Inputs are min-max scaled (numeric) and one-hot encoded (categorical).
//! One-hot vectors are never materialized: two rows differ by 0 on a
//! categorical feature with equal tokens, by 2 with different known tokens
//! and by 1 when exactly one token is unknown (an all-zero indicator).
//!
//! The binary solver selects working pairs by second-order information and
//! stops when the maximal KKT violation falls below `tol`, in the manner of
//! LIBSVM (without shrinking).

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_trainable, LearnerError, Prediction};
use crate::dataset::{Dataset, FeatureKind, Schema};

const TAU: f64 = 1e-12;
const UNKNOWN: u32 = u32::MAX;
const CACHE_BYTES: usize = 32 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    /// `None` means 1 / (encoded feature count).
    pub gamma: Option<f64>,
    pub tol: f64,
    /// `None` means max(10^7, 100 * rows) iterations per pair.
    pub max_iter: Option<usize>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, gamma: None, tol: 1e-3, max_iter: None }
    }
}

/// A scaled row: numeric values in training units of [0, 1] and one token
/// index per categorical feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    num: Vec<f64>,
    cat: Vec<u32>,
}

fn distance2(a: &Point, b: &Point) -> f64 {
    let mut d: f64 = a.num.iter().zip(&b.num).map(|(x, y)| (x - y) * (x - y)).sum();
    for (&x, &y) in a.cat.iter().zip(&b.cat) {
        if x != y {
            d += if x == UNKNOWN || y == UNKNOWN { 1.0 } else { 2.0 };
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    /// (feature, min, max) per numeric feature.
    numeric: Vec<(usize, f64, f64)>,
    /// (feature, token count) per categorical feature.
    categorical: Vec<(usize, usize)>,
}

impl Encoder {
    fn fit(dataset: &Dataset) -> Self {
        let mut numeric = Vec::new();
        let mut categorical = Vec::new();
        for (j, f) in dataset.schema.features.iter().enumerate() {
            match &f.kind {
                FeatureKind::Numeric => {
                    let (lo, hi) = dataset
                        .samples
                        .iter()
                        .map(|s| s.values[j])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                    numeric.push((j, lo, hi));
                }
                FeatureKind::Categorical { tokens } => categorical.push((j, tokens.len())),
            }
        }
        Encoder { numeric, categorical }
    }

    pub fn encoded_dim(&self) -> usize {
        self.numeric.len() + self.categorical.iter().map(|(_, k)| k).sum::<usize>()
    }

    fn encode(&self, row: &[f64]) -> Point {
        Point {
            num: self
                .numeric
                .iter()
                .map(|&(j, lo, hi)| if hi > lo { (row[j] - lo) / (hi - lo) } else { 0.0 })
                .collect(),
            cat: self
                .categorical
                .iter()
                .map(|&(j, k)| {
                    let t = row[j] as usize;
                    if t < k {
                        t as u32
                    } else {
                        UNKNOWN
                    }
                })
                .collect(),
        }
    }
}

/// Decision function for classes `(positive, negative)`:
/// `f(x) = sum coef_i K(sv_i, x) - rho`, where `coef_i = y_i alpha_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: usize,
    pub negative: usize,
    /// Indices into the model's support-vector list.
    pub support: Vec<usize>,
    pub coef: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    n_classes: usize,
    c: f64,
    gamma: f64,
    encoder: Encoder,
    support_vectors: Vec<Point>,
    /// Classes that had training rows.
    trained: Vec<usize>,
    pairs: Vec<BinarySvm>,
}

impl SvmModel {
    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }

    pub fn pairs(&self) -> &[BinarySvm] {
        &self.pairs
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Decision value of every pair, in `pairs()` order.
    pub fn decision_values(&self, row: &[f64]) -> Vec<f64> {
        let x = self.encoder.encode(row);
        let k: Vec<f64> = self.support_vectors.iter().map(|sv| (-self.gamma * distance2(sv, &x)).exp()).collect();
        self.pairs.iter().map(|p| p.support.iter().zip(&p.coef).map(|(&s, c)| c * k[s]).sum::<f64>() - p.rho).collect()
    }

    /// Pairwise voting; ties go to the larger summed margin, then the lower
    /// class. Probabilities are vote shares.
    pub fn predict(&self, row: &[f64]) -> Prediction {
        let m = self.n_classes;
        let mut votes = vec![0.0; m];
        if self.pairs.is_empty() {
            votes[self.trained.first().copied().unwrap_or(0)] = 1.0;
            return Prediction::from_probabilities(votes);
        }
        let mut margin = vec![0.0; m];
        for (p, d) in self.pairs.iter().zip(self.decision_values(row)) {
            votes[if d > 0.0 { p.positive } else { p.negative }] += 1.0;
            margin[p.positive] += d;
            margin[p.negative] -= d;
        }
        let mut best = self.trained[0];
        for &c in &self.trained {
            if votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best]) {
                best = c;
            }
        }
        let total: f64 = votes.iter().sum();
        Prediction { class: best as u8 + 1, probabilities: votes.iter().map(|v| v / total).collect() }
    }
}

pub fn train_svm(dataset: &Dataset, config: &SvmConfig) -> Result<SvmModel, LearnerError> {
    check_trainable(dataset)?;
    let encoder = Encoder::fit(dataset);
    let gamma = config.gamma.unwrap_or_else(|| 1.0 / encoder.encoded_dim().max(1) as f64);
    let points: Vec<Point> = dataset.samples.iter().map(|s| encoder.encode(&s.values)).collect();
    let m = dataset.n_classes();
    let mut members = vec![Vec::new(); m];
    for (i, s) in dataset.samples.iter().enumerate() {
        members[s.class_index()].push(i);
    }
    let trained: Vec<usize> = (0..m).filter(|&c| !members[c].is_empty()).collect();
    let pair_ids: Vec<(usize, usize)> =
        trained.iter().enumerate().flat_map(|(a, &i)| trained[a + 1..].iter().map(move |&j| (i, j))).collect();

    let solved: Vec<(usize, usize, Vec<usize>, Solution)> = pair_ids
        .par_iter()
        .map(|&(pos, neg)| {
            let idx: Vec<usize> = members[pos].iter().chain(&members[neg]).copied().collect();
            let pts: Vec<&Point> = idx.iter().map(|&i| &points[i]).collect();
            let y: Vec<f64> = (0..idx.len()).map(|t| if t < members[pos].len() { 1.0 } else { -1.0 }).collect();
            let max_iter = config.max_iter.unwrap_or_else(|| (100 * idx.len()).max(10_000_000));
            let sol = solve(&pts, &y, gamma, config.c, config.tol, max_iter);
            (pos, neg, idx, sol)
        })
        .collect();

    let mut sv_of_row: HashMap<usize, usize> = HashMap::new();
    let mut support_vectors = Vec::new();
    let mut pairs = Vec::with_capacity(solved.len());
    for (positive, negative, idx, sol) in solved {
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (t, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                let row = idx[t];
                let id = *sv_of_row.entry(row).or_insert_with(|| {
                    support_vectors.push(points[row].clone());
                    support_vectors.len() - 1
                });
                support.push(id);
                coef.push(sol.y[t] * a);
            }
        }
        pairs.push(BinarySvm {
            positive,
            negative,
            support,
            coef,
            rho: sol.rho,
            converged: sol.converged,
            iterations: sol.iterations,
        });
    }
    Ok(SvmModel { n_classes: m, c: config.c, gamma, encoder, support_vectors, trained, pairs })
}

struct KernelRows<'a> {
    points: &'a [&'a Point],
    gamma: f64,
    rows: Vec<Option<Vec<f64>>>,
    last_used: Vec<u64>,
    cached: Vec<usize>,
    capacity: usize,
    clock: u64,
}

impl<'a> KernelRows<'a> {
    fn new(points: &'a [&'a Point], gamma: f64) -> Self {
        let l = points.len();
        let capacity = (CACHE_BYTES / (8 * l.max(1))).clamp(2, l.max(2));
        KernelRows { points, gamma, rows: vec![None; l], last_used: vec![0; l], cached: Vec::new(), capacity, clock: 0 }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if self.rows[i].is_none() {
            if self.cached.len() >= self.capacity {
                let (pos, _) =
                    self.cached.iter().enumerate().min_by_key(|(_, &r)| self.last_used[r]).expect("cache is non-empty");
                let evicted = self.cached.swap_remove(pos);
                self.rows[evicted] = None;
            }
            let xi = self.points[i];
            let row = self.points.iter().map(|p| (-self.gamma * distance2(xi, p)).exp()).collect();
            self.rows[i] = Some(row);
            self.cached.push(i);
        }
        self.rows[i].as_deref().expect("row was just filled")
    }
}

struct Solution {
    alpha: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
    converged: bool,
    iterations: usize,
}

/// Solves min 1/2 a'Qa - e'a subject to 0 <= a <= c and y'a = 0, with
/// Q_ij = y_i y_j K(x_i, x_j).
fn solve(points: &[&Point], y: &[f64], gamma: f64, c: f64, tol: f64, max_iter: usize) -> Solution {
    let l = points.len();
    let mut alpha = vec![0.0; l];
    let mut grad = vec![-1.0; l];
    let mut kernel = KernelRows::new(points, gamma);
    let mut iterations = 0;
    let mut converged = false;
    // RBF kernels have K(x, x) = 1.
    let qd = 1.0;

    while iterations < max_iter {
        // First index: maximal violation among rows that may move up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            if up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            converged = true;
            break;
        }
        let ki = kernel.row(i).to_vec();
        // Second index: largest guaranteed objective decrease.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut obj_min = f64::INFINITY;
        for t in 0..l {
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if !low {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = (qd + qd - 2.0 * ki[t]).max(TAU);
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= obj_min {
                    obj_min = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < tol || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;
        let kj = kernel.row(j).to_vec();
        let q_ij = y[i] * y[j] * ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let quad = (qd + qd + 2.0 * q_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qd + qd - 2.0 * q_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..l {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..l {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    Solution { alpha, y: y.to_vec(), rho, converged, iterations }
}

/// Encoded input dimension of a schema: numeric features plus one
/// indicator per categorical token.
pub fn encoded_dim(schema: &Schema) -> usize {
    schema
        .features
        .iter()
        .map(|f| match &f.kind {
            FeatureKind::Numeric => 1,
            FeatureKind::Categorical { tokens } => tokens.len(),
        })
        .sum()
}
