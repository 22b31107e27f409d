//! Analytic hierarchy process: priority weights and consistency of a
//! pairwise-comparison matrix, plus an audit of the bundled weight vectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::WeightVectors;

const MAX_ITERATIONS: usize = 10_000;
const TOLERANCE: f64 = 1e-10;
const RECIPROCITY_TOLERANCE: f64 = 1e-9;
/// Allowed deviation of a weight vector's absolute sum from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 0.01;

/// Saaty's random consistency index for n = 1..=10.
const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

#[derive(Debug, Error, PartialEq)]
pub enum AhpError {
    #[error("matrix is empty or not square")]
    NotSquare,
    #[error("entry ({row}, {col}) = {value} is not positive and finite")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("entries ({row}, {col}) and ({col}, {row}) are not reciprocal")]
    NotReciprocal { row: usize, col: usize },
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("no random index for n = {0} (supported up to {max})", max = RANDOM_INDEX.len())]
    Unsupported(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PairwiseMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, AhpError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(AhpError::NotSquare);
        }
        if n > RANDOM_INDEX.len() {
            return Err(AhpError::Unsupported(n));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        for (k, &value) in entries.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(AhpError::NonPositiveEntry { row: k / n, col: k % n, value });
            }
        }
        for i in 0..n {
            for j in i..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if (a * b - 1.0).abs() > RECIPROCITY_TOLERANCE {
                    return Err(AhpError::NotReciprocal { row: i, col: j });
                }
            }
        }
        Ok(PairwiseMatrix { n, entries })
    }

    /// Parses `n` whitespace-separated lines of `n` numbers each. Entries
    /// may be written as fractions such as `1/3`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .enumerate()
            .map(|(i, line)| {
                line.split_whitespace()
                    .map(|tok| parse_entry(tok).ok_or_else(|| format!("line {}: bad number `{tok}`", i + 1)))
                    .collect::<Result<Vec<f64>, String>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        PairwiseMatrix::new(rows).map_err(|e| e.to_string())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    fn mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }
}

fn parse_entry(tok: &str) -> Option<f64> {
    match tok.split_once('/') {
        Some((a, b)) => Some(a.parse::<f64>().ok()? / b.parse::<f64>().ok()?),
        None => tok.parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityVector {
    pub weights: Vec<f64>,
    pub lambda_max: f64,
    pub consistency_index: f64,
    pub consistency_ratio: f64,
}

/// Principal right eigenvector by power iteration, normalized to sum 1.
pub fn weights_from_matrix(m: &PairwiseMatrix) -> Result<PriorityVector, AhpError> {
    let n = m.n();
    let mut w = vec![1.0 / n as f64; n];
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let next = m.mul(&w);
        let total: f64 = next.iter().sum();
        let next: Vec<f64> = next.into_iter().map(|x| x / total).collect();
        let change = w.iter().zip(&next).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
        w = next;
        if change <= TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AhpError::NoConvergence(MAX_ITERATIONS));
    }
    let aw = m.mul(&w);
    let lambda_max = aw.iter().zip(&w).map(|(a, b)| a / b).sum::<f64>() / n as f64;
    let consistency_index = if n > 1 { (lambda_max - n as f64) / (n as f64 - 1.0) } else { 0.0 };
    let ri = RANDOM_INDEX[n - 1];
    let consistency_ratio = if ri > 0.0 { consistency_index / ri } else { 0.0 };
    Ok(PriorityVector { weights: w, lambda_max, consistency_index, consistency_ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightAudit {
    pub vector: String,
    pub abs_sum: f64,
    pub deviation: f64,
    pub flagged: bool,
}

/// Sum of absolute weights per vector and its deviation from 1; vectors
/// off by more than [`WEIGHT_SUM_TOLERANCE`] are flagged.
pub fn validate_paper_weights(vectors: &WeightVectors) -> Vec<WeightAudit> {
    vectors
        .iter()
        .map(|v| {
            let abs_sum: f64 = v.terms.iter().map(|t| t.weight).sum();
            let deviation = abs_sum - 1.0;
            WeightAudit { vector: v.label(), abs_sum, deviation, flagged: deviation.abs() > WEIGHT_SUM_TOLERANCE }
        })
        .collect()
}

pub fn format_audit(audit: &[WeightAudit]) -> String {
    let mut out = String::from("weight vector            |w| sum  deviation  status\n");
    for a in audit {
        out.push_str(&format!(
            "{:<22} {:>8.4} {:>+10.4}  {}\n",
            a.vector,
            a.abs_sum,
            a.deviation,
            if a.flagged { "FLAGGED" } else { "ok" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones() {
        let m = PairwiseMatrix::new(vec![vec![1.0; 3]; 3]).unwrap();
        let p = weights_from_matrix(&m).unwrap();
        for w in &p.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(p.consistency_ratio.abs() < 1e-12);
    }

    #[test]
    fn two_by_two() {
        let m = PairwiseMatrix::new(vec![vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]]).unwrap();
        let p = weights_from_matrix(&m).unwrap();
        assert!((p.weights[0] - 0.75).abs() < 1e-12);
        assert!((p.weights[1] - 0.25).abs() < 1e-12);
        assert_eq!(p.consistency_ratio, 0.0);
    }

    #[test]
    fn inconsistent_matrix_has_positive_ratio() {
        let m = PairwiseMatrix::parse("1 3 1/5\n1/3 1 4\n5 1/4 1\n").unwrap();
        let p = weights_from_matrix(&m).unwrap();
        assert!(p.consistency_ratio > 0.1);
        assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert_eq!(
            PairwiseMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(AhpError::NotReciprocal { row: 0, col: 1 })
        );
        assert!(matches!(
            PairwiseMatrix::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]),
            Err(AhpError::NonPositiveEntry { .. })
        ));
        assert_eq!(PairwiseMatrix::new(vec![vec![1.0, 1.0]]), Err(AhpError::NotSquare));
        assert!(PairwiseMatrix::parse("1 x\n1 1").is_err());
    }

    #[test]
    fn audit_flags_bowling_opposition_only() {
        let audit = validate_paper_weights(&WeightVectors::paper_default());
        let flagged: Vec<&str> = audit.iter().filter(|a| a.flagged).map(|a| a.vector.as_str()).collect();
        assert_eq!(flagged, ["bowling.opposition"]);
        let bo = audit.iter().find(|a| a.vector == "bowling.opposition").unwrap();
        assert!((bo.abs_sum - 1.0695).abs() < 1e-4);
    }
}
