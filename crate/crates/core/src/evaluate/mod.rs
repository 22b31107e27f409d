//! Split protocol, metrics and experiment reports.

mod experiment;
mod metrics;
mod report;
mod split;

use thiserror::Error;

use crate::learners::LearnerError;
use crate::resample::SmoteError;

pub use experiment::{
    prepare_fold, run_cell, run_experiment, CellTiming, EvalReport, ExperimentConfig, ExperimentOutput, PreparedFold,
    ReportRow,
};
pub use metrics::{binary_auroc, confusion, metrics, predict_all, ConfusionMatrix, MetricSet};
pub use report::{format_csv, format_text, format_timings, split_label};
pub use split::{split, split_indices, SplitSpec, SplitStrategy};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("class {class} has {count} row(s); a split needs at least 2")]
    TooFewRows { class: u8, count: usize },
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("experiment needs at least one learner and one split")]
    EmptyGrid,
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Smote(#[from] SmoteError),
}
