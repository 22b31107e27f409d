use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, predict_all, ConfusionMatrix, MetricSet};
use super::split::{split_indices, SplitSpec, SplitStrategy};
use super::EvalError;
use crate::dataset::Dataset;
use crate::featurize::{ImputeStats, StatisticsSource, Target};
use crate::learners::{LearnerKind, LearnerSpec, TrainedModel};
use crate::resample::{balance_all, SmoteConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub learners: Vec<LearnerSpec>,
    pub train_fractions: Vec<f64>,
    pub strategy: SplitStrategy,
    /// `None` trains on the imputed fold as is.
    pub smote: Option<SmoteConfig>,
    /// How missing values in the training fold are filled. The test fold
    /// always uses training-fold global means.
    pub train_impute: StatisticsSource,
    pub target: Option<Target>,
    /// Return every trained model alongside the report.
    pub keep_models: bool,
}

impl ExperimentConfig {
    /// Four default learners on the 60/70/80/90 splits with SMOTE, all
    /// randomness derived from `seed`.
    pub fn standard(seed: u64) -> Self {
        ExperimentConfig {
            learners: LearnerKind::ALL.iter().map(|&k| LearnerSpec::default_for(k, seed)).collect(),
            train_fractions: vec![0.6, 0.7, 0.8, 0.9],
            strategy: SplitStrategy::StratifiedRandom { seed },
            smote: Some(SmoteConfig { k: 5, seed }),
            train_impute: StatisticsSource::TrainingFold,
            target: None,
            keep_models: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub learner: LearnerKind,
    pub train_fraction: f64,
    pub metrics: MetricSet,
    pub confusion: ConfusionMatrix,
    pub train_rows: usize,
    pub synthetic_rows: usize,
    pub test_rows: usize,
    pub warnings: Vec<String>,
}

/// Everything but wall time, so identical runs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: Option<Target>,
    pub n_classes: usize,
    pub train_fractions: Vec<f64>,
    /// One row per (learner, split), learners in configured order.
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn row(&self, learner: LearnerKind, train_fraction: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.learner == learner && r.train_fraction == train_fraction)
    }

    pub fn learners(&self) -> Vec<LearnerKind> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.learner) {
                out.push(r.learner);
            }
        }
        out
    }

    /// The row with the highest accuracy for a learner; ties go to the
    /// larger training fraction.
    pub fn best_row(&self, learner: LearnerKind) -> Option<&ReportRow> {
        self.rows.iter().filter(|r| r.learner == learner).fold(None, |best: Option<&ReportRow>, r| match best {
            Some(b) if b.metrics.accuracy > r.metrics.accuracy => Some(b),
            Some(b) if b.metrics.accuracy == r.metrics.accuracy && b.train_fraction > r.train_fraction => Some(b),
            _ => Some(r),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub learner: LearnerKind,
    pub train_fraction: f64,
    pub wall_ms: f64,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub report: EvalReport,
    pub timings: Vec<CellTiming>,
    /// Filled only when `keep_models` is set; same order as the report rows.
    pub models: Vec<TrainedModel>,
}

/// A fold ready for training: the test fold never sees SMOTE, and both
/// folds are imputed from training-fold statistics only.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub stats: ImputeStats,
    pub train: Dataset,
    pub test: Dataset,
}

pub fn prepare_fold(
    dataset: &Dataset,
    spec: &SplitSpec,
    smote: Option<&SmoteConfig>,
    train_impute: StatisticsSource,
) -> Result<PreparedFold, EvalError> {
    let (train_indices, test_indices) = split_indices(dataset, spec)?;
    let raw_train = dataset.subset(&train_indices);
    let stats = ImputeStats::fit(&raw_train);
    let imputed = stats.apply(&raw_train, train_impute);
    let train = match smote {
        Some(cfg) => balance_all(&imputed, cfg)?,
        None => imputed,
    };
    let test = stats.apply(&dataset.subset(&test_indices), StatisticsSource::Global);
    Ok(PreparedFold { train_indices, test_indices, stats, train, test })
}

/// One (learner, split) cell: prepare the fold, train, score the test fold.
pub fn run_cell(
    dataset: &Dataset,
    learner: &LearnerSpec,
    spec: &SplitSpec,
    smote: Option<&SmoteConfig>,
    train_impute: StatisticsSource,
    target: Option<Target>,
) -> Result<(ReportRow, TrainedModel), EvalError> {
    let fold = prepare_fold(dataset, spec, smote, train_impute)?;
    if fold.test.samples.iter().any(|s| s.origin.is_synthetic()) {
        return Err(EvalError::ShapeMismatch("test fold holds synthetic rows".to_string()));
    }
    let mut model = learner.train(&fold.train)?;
    model.target = target;
    model.impute = Some(fold.stats);
    let (predicted, probs) = predict_all(&model, &fold.test)?;
    let truth: Vec<u8> = fold.test.samples.iter().map(|s| s.label).collect();
    let cm = ConfusionMatrix::from_labels(dataset.n_classes(), &truth, &predicted)?;
    let row = ReportRow {
        learner: learner.kind(),
        train_fraction: spec.train_fraction,
        metrics: metrics(&cm, &probs, &truth)?,
        confusion: cm,
        train_rows: fold.train.len(),
        synthetic_rows: fold.train.samples.iter().filter(|s| s.origin.is_synthetic()).count(),
        test_rows: fold.test.len(),
        warnings: model.warnings.clone(),
    };
    Ok((row, model))
}

/// Runs every (learner, split) cell. Cells are independent and may run in
/// parallel; rows come back in (learner, split) order regardless.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentOutput, EvalError> {
    if config.learners.is_empty() || config.train_fractions.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let cells: Vec<(&LearnerSpec, f64)> =
        config.learners.iter().flat_map(|l| config.train_fractions.iter().map(move |&f| (l, f))).collect();
    let results = cells
        .par_iter()
        .map(|&(learner, train_fraction)| {
            let start = Instant::now();
            let spec = SplitSpec { train_fraction, strategy: config.strategy };
            let (row, model) =
                run_cell(dataset, learner, &spec, config.smote.as_ref(), config.train_impute, config.target)?;
            let timing =
                CellTiming { learner: row.learner, train_fraction, wall_ms: start.elapsed().as_secs_f64() * 1e3 };
            Ok((row, timing, config.keep_models.then_some(model)))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut rows = Vec::with_capacity(results.len());
    let mut timings = Vec::with_capacity(results.len());
    let mut models = Vec::new();
    for (row, timing, model) in results {
        rows.push(row);
        timings.push(timing);
        models.extend(model);
    }
    let report = EvalReport {
        target: config.target,
        n_classes: dataset.n_classes(),
        train_fractions: config.train_fractions.clone(),
        rows,
    };
    Ok(ExperimentOutput { report, timings, models })
}
