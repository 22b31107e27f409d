use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

/// Where imputation statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsSource {
    /// Per-class means of the dataset itself (for a labelled training fold).
    TrainingFold,
    /// Means over all rows, ignoring labels.
    Global,
}

/// Means of every numeric feature, per class and overall, over defined
/// (non-NaN) values. Categorical features carry `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputeStats {
    pub class_means: Vec<Vec<Option<f64>>>,
    pub global_means: Vec<Option<f64>>,
}

fn mean(sum: f64, n: usize) -> Option<f64> {
    (n > 0).then(|| sum / n as f64)
}

impl ImputeStats {
    pub fn fit(dataset: &Dataset) -> Self {
        let f = dataset.schema.len();
        let m = dataset.n_classes();
        let mut class_acc = vec![vec![(0.0, 0usize); f]; m];
        let mut global_acc = vec![(0.0, 0usize); f];
        for s in &dataset.samples {
            for (j, &v) in s.values.iter().enumerate() {
                if v.is_nan() || !dataset.schema.features[j].is_numeric() {
                    continue;
                }
                let c = &mut class_acc[s.class_index()][j];
                c.0 += v;
                c.1 += 1;
                global_acc[j].0 += v;
                global_acc[j].1 += 1;
            }
        }
        ImputeStats {
            class_means: class_acc.into_iter().map(|row| row.into_iter().map(|(s, n)| mean(s, n)).collect()).collect(),
            global_means: global_acc.into_iter().map(|(s, n)| mean(s, n)).collect(),
        }
    }

    /// Fills NaNs with the global mean, or 0 for a feature never observed.
    pub fn fill_global(&self, values: &mut [f64]) {
        for (v, g) in values.iter_mut().zip(&self.global_means) {
            if v.is_nan() {
                *v = g.unwrap_or(0.0);
            }
        }
    }

    /// Fills NaNs with the mean of class `class_index`, falling back to the
    /// global mean when the class has no defined value.
    pub fn fill_class(&self, values: &mut [f64], class_index: usize) {
        let class = &self.class_means[class_index];
        for (j, v) in values.iter_mut().enumerate() {
            if v.is_nan() {
                *v = class[j].or(self.global_means[j]).unwrap_or(0.0);
            }
        }
    }

    pub fn apply(&self, dataset: &Dataset, source: StatisticsSource) -> Dataset {
        let mut out = dataset.clone();
        for s in &mut out.samples {
            let class = s.class_index();
            match source {
                StatisticsSource::TrainingFold => self.fill_class(&mut s.values, class),
                StatisticsSource::Global => self.fill_global(&mut s.values),
            }
        }
        out
    }
}

/// Replaces every missing numeric value using statistics of `dataset`
/// itself. See [`ImputeStats`] for applying one fold's statistics to
/// another.
pub fn impute(dataset: &Dataset, source: StatisticsSource) -> Dataset {
    ImputeStats::fit(dataset).apply(dataset, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::testutil::dataset;
    use crate::dataset::Feature;

    fn data() -> Dataset {
        dataset(
            vec![Feature::numeric("venue"), Feature::numeric("opposition")],
            3,
            vec![
                (vec![2.0, 1.0], 3),
                (vec![3.0, f64::NAN], 3),
                (vec![f64::NAN, 2.0], 3),
                (vec![f64::NAN, 4.0], 2),
                (vec![10.0, 5.0], 1),
            ],
        )
    }

    #[test]
    fn class_mean_replaces_missing() {
        let out = impute(&data(), StatisticsSource::TrainingFold);
        assert_eq!(out.samples[2].values[0], 2.5);
        assert_eq!(out.samples[1].values[1], 1.5);
        assert_eq!(out.missing_count(), 0);
    }

    #[test]
    fn empty_class_falls_back_to_global() {
        let out = impute(&data(), StatisticsSource::TrainingFold);
        assert_eq!(out.samples[3].values[0], 5.0);
    }

    #[test]
    fn global_mode_ignores_labels() {
        let out = impute(&data(), StatisticsSource::Global);
        assert_eq!(out.samples[2].values[0], 5.0);
        assert_eq!(out.samples[1].values[1], 3.0);
    }

    #[test]
    fn complete_data_is_unchanged() {
        let d = dataset(vec![Feature::numeric("x")], 2, vec![(vec![1.0], 1), (vec![2.0], 2)]);
        assert_eq!(impute(&d, StatisticsSource::TrainingFold), d);
    }
}
