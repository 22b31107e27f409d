//! SMOTE oversampling.
//!
//! Synthetic rows lie on the segment between an original row and one of its
//! nearest same-class neighbours. Distances use z-scored numeric features
//! (within the class) plus 1 per categorical mismatch. A synthetic takes a
//! categorical value from the original when its gap is below 0.5 and from
//! the neighbour otherwise.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Origin, Sample, Schema};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig { k: 5, seed: 0 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmoteError {
    #[error("class {class} has {rows} row(s); SMOTE needs at least 2")]
    DegenerateClass { class: u8, rows: usize },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("amount must be a positive multiple of 100, got {0}")]
    InvalidAmount(u32),
}

/// A generated row: `source + gap * (neighbor - source)`, with `source` and
/// `neighbor` indexing the rows passed to [`smote_class`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub values: Vec<f64>,
    pub source: usize,
    pub neighbor: usize,
    pub gap: f64,
}

struct Scaler {
    std: Vec<f64>,
    numeric: Vec<bool>,
}

impl Scaler {
    fn fit(schema: &Schema, rows: &[&[f64]]) -> Self {
        let f = schema.len();
        let n = rows.len() as f64;
        let numeric: Vec<bool> = schema.features.iter().map(|x| x.is_numeric()).collect();
        let mean: Vec<f64> = (0..f).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..f)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { std, numeric }
    }

    fn distance2(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut d = 0.0;
        for j in 0..a.len() {
            if self.numeric[j] {
                let z = (a[j] - b[j]) / self.std[j];
                d += z * z;
            } else if a[j] != b[j] {
                d += 1.0;
            }
        }
        d
    }
}

fn nearest(scaler: &Scaler, rows: &[&[f64]], i: usize, k: usize) -> Vec<usize> {
    let mut by_distance: Vec<(f64, usize)> =
        (0..rows.len()).filter(|&j| j != i).map(|j| (scaler.distance2(rows[i], rows[j]), j)).collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    by_distance.truncate(k);
    by_distance.into_iter().map(|(_, j)| j).collect()
}

/// `amount_pct / 100` synthetics per row of one class. `k` is clamped to
/// `rows.len() - 1`. Each row's synthetics use distinct neighbours until
/// all `k` are used, then start a fresh round.
pub fn smote_class(
    schema: &Schema,
    rows: &[&[f64]],
    amount_pct: u32,
    cfg: &SmoteConfig,
    class: u8,
) -> Result<Vec<Synthetic>, SmoteError> {
    if cfg.k == 0 {
        return Err(SmoteError::InvalidK);
    }
    if amount_pct == 0 || !amount_pct.is_multiple_of(100) {
        return Err(SmoteError::InvalidAmount(amount_pct));
    }
    if rows.len() < 2 {
        return Err(SmoteError::DegenerateClass { class, rows: rows.len() });
    }
    let k = cfg.k.min(rows.len() - 1);
    let per_row = (amount_pct / 100) as usize;
    let scaler = Scaler::fit(schema, rows);
    let mut rng = seeded(cfg.seed, 0);
    let mut out = Vec::with_capacity(rows.len() * per_row);
    for (i, x) in rows.iter().enumerate() {
        let mut pool = nearest(&scaler, rows, i, k);
        let mut left = per_row;
        while left > 0 {
            pool.shuffle(&mut rng);
            for &nb in pool.iter().take(left) {
                let gap: f64 = rng.gen();
                let xn = rows[nb];
                let values = (0..x.len())
                    .map(|j| {
                        if scaler.numeric[j] {
                            let (lo, hi) = if x[j] <= xn[j] { (x[j], xn[j]) } else { (xn[j], x[j]) };
                            (x[j] + gap * (xn[j] - x[j])).clamp(lo, hi)
                        } else if gap < 0.5 {
                            x[j]
                        } else {
                            xn[j]
                        }
                    })
                    .collect();
                out.push(Synthetic { values, source: i, neighbor: nb, gap });
            }
            left -= left.min(pool.len());
        }
    }
    Ok(out)
}

/// Oversamples every non-empty class up to the majority count. Class `c`
/// (0-based) uses seed `cfg.seed + c`. When the deficit is not a multiple
/// of the class size, the next multiple is generated and a seeded uniform
/// subsample of the synthetics kept. Originals keep their order and come
/// first; synthetics follow grouped by class.
pub fn balance_all(dataset: &Dataset, cfg: &SmoteConfig) -> Result<Dataset, SmoteError> {
    let counts = dataset.class_counts();
    let target = counts.iter().copied().max().unwrap_or(0);
    let per_class: Vec<Vec<Sample>> = (0..counts.len())
        .into_par_iter()
        .map(|c| {
            let have = counts[c];
            if have == 0 || have == target {
                return Ok(Vec::new());
            }
            let members: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.samples[i].class_index() == c).collect();
            let rows: Vec<&[f64]> = members.iter().map(|&i| dataset.samples[i].values.as_slice()).collect();
            let need = target - have;
            let amount = need.div_ceil(have) as u32 * 100;
            let class_cfg = SmoteConfig { k: cfg.k, seed: cfg.seed.wrapping_add(c as u64) };
            let label = (c + 1) as u8;
            let mut synth = smote_class(&dataset.schema, &rows, amount, &class_cfg, label)?;
            if synth.len() > need {
                let mut keep = index::sample(&mut seeded(class_cfg.seed, 1), synth.len(), need).into_vec();
                keep.sort_unstable();
                synth = keep.into_iter().map(|i| synth[i].clone()).collect();
            }
            Ok(synth
                .into_iter()
                .map(|s| {
                    let src = &dataset.samples[members[s.source]];
                    Sample {
                        values: s.values,
                        label,
                        provenance: src.provenance.clone(),
                        origin: Origin::Synthetic {
                            source: members[s.source],
                            neighbor: members[s.neighbor],
                            gap: s.gap,
                        },
                    }
                })
                .collect())
        })
        .collect::<Result<_, SmoteError>>()?;
    let mut samples = dataset.samples.clone();
    samples.extend(per_class.into_iter().flatten());
    Ok(dataset.with_samples(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::testutil::dataset;
    use crate::dataset::Feature;

    fn schema2() -> Schema {
        Schema::new(vec![Feature::numeric("a"), Feature::numeric("b")], 2).unwrap()
    }

    #[test]
    fn midpoint_of_sole_neighbour() {
        let rows: Vec<&[f64]> = vec![&[0.0, 0.0], &[2.0, 2.0]];
        let out = smote_class(&schema2(), &rows, 100, &SmoteConfig { k: 5, seed: 1 }, 1).unwrap();
        assert_eq!(out.len(), 2);
        let s = &out[0];
        assert_eq!(s.neighbor, 1);
        assert_eq!(s.values, vec![2.0 * s.gap, 2.0 * s.gap]);
    }

    #[test]
    fn distinct_neighbours_per_row() {
        let data: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let out = smote_class(&schema2(), &rows, 300, &SmoteConfig::default(), 1).unwrap();
        assert_eq!(out.len(), 30);
        for chunk in out.chunks(3) {
            let mut nbs: Vec<usize> = chunk.iter().map(|s| s.neighbor).collect();
            nbs.sort_unstable();
            nbs.dedup();
            assert_eq!(nbs.len(), 3);
        }
    }

    #[test]
    fn identical_rows_reproduce_themselves() {
        let rows: Vec<&[f64]> = vec![&[1.5, -2.0]; 4];
        for s in smote_class(&schema2(), &rows, 200, &SmoteConfig::default(), 1).unwrap() {
            assert_eq!(s.values, vec![1.5, -2.0]);
        }
    }

    #[test]
    fn errors() {
        let one: Vec<&[f64]> = vec![&[0.0, 0.0]];
        assert_eq!(
            smote_class(&schema2(), &one, 100, &SmoteConfig::default(), 2),
            Err(SmoteError::DegenerateClass { class: 2, rows: 1 })
        );
        let two: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0]];
        assert_eq!(smote_class(&schema2(), &two, 150, &SmoteConfig::default(), 1), Err(SmoteError::InvalidAmount(150)));
        assert_eq!(smote_class(&schema2(), &two, 100, &SmoteConfig { k: 0, seed: 0 }, 1), Err(SmoteError::InvalidK));
    }

    #[test]
    fn remainder_is_subsampled() {
        let rows: Vec<(Vec<f64>, u8)> = (0..17).map(|i| (vec![i as f64, 1.0], if i < 10 { 1 } else { 2 })).collect();
        let d = dataset(vec![Feature::numeric("a"), Feature::numeric("b")], 2, rows);
        let out = balance_all(&d, &SmoteConfig::default()).unwrap();
        assert_eq!(out.class_counts(), vec![10, 10]);
        assert_eq!(out.samples.iter().filter(|s| s.origin.is_synthetic()).count(), 3);
        assert_eq!(out.samples[..17], d.samples[..]);
    }

    #[test]
    fn categorical_follows_gap() {
        let schema =
            Schema::new(vec![Feature::numeric("a"), Feature::categorical("h", vec!["L".into(), "R".into()])], 2)
                .unwrap();
        let rows: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0]];
        for s in smote_class(&schema, &rows, 500, &SmoteConfig { k: 1, seed: 9 }, 1).unwrap() {
            let expect = if s.gap < 0.5 { rows[s.source][1] } else { rows[s.neighbor][1] };
            assert_eq!(s.values[1], expect);
        }
    }
}
