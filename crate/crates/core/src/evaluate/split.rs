use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset::Dataset;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStrategy {
    StratifiedRandom { seed: u64 },
    Chronological,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub strategy: SplitStrategy,
}

/// Train and test row indices, each ascending.
pub fn split_indices(dataset: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    let frac = spec.train_fraction;
    if !(frac > 0.0 && frac < 1.0) {
        return Err(EvalError::InvalidFraction(frac));
    }
    let (mut train, mut test) = match spec.strategy {
        SplitStrategy::StratifiedRandom { seed } => {
            let mut rng = seeded(seed, 0);
            let mut by_class = vec![Vec::new(); dataset.n_classes()];
            for (i, s) in dataset.samples.iter().enumerate() {
                by_class[s.class_index()].push(i);
            }
            let (mut train, mut test) = (Vec::new(), Vec::new());
            for (c, mut rows) in by_class.into_iter().enumerate() {
                if rows.is_empty() {
                    continue;
                }
                if rows.len() < 2 {
                    return Err(EvalError::TooFewRows { class: c as u8 + 1, count: rows.len() });
                }
                rows.shuffle(&mut rng);
                let k = ((frac * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
                test.extend_from_slice(&rows[k..]);
                rows.truncate(k);
                train.extend(rows);
            }
            (train, test)
        }
        SplitStrategy::Chronological => {
            let n = dataset.len();
            if n < 2 {
                return Err(EvalError::TooFewRows { class: 0, count: n });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                let (pa, pb) = (&dataset.samples[a].provenance, &dataset.samples[b].provenance);
                (pa.match_date, &pa.player_id, a).cmp(&(pb.match_date, &pb.player_id, b))
            });
            let k = ((frac * n as f64).round() as usize).clamp(1, n - 1);
            let test = order.split_off(k);
            (order, test)
        }
    };
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), EvalError> {
    let (train, test) = split_indices(dataset, spec)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}
