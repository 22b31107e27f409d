//! Four classifiers behind one train/predict contract, plus the model file
//! format.
//!
//! Every learner consumes an imputed [`Dataset`] (NaN values are rejected)
//! and produces a [`TrainedModel`] whose probability vectors have one entry
//! per class and sum to 1.

mod cart;
pub mod entropy;
mod forest;
mod naive_bayes;
mod svm;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Schema};
use crate::featurize::{ImputeStats, Target};

pub use cart::{train_cart, CartConfig, CartModel, CartNode};
pub use forest::{default_mtry, train_forest, ForestConfig, ForestModel};
pub use naive_bayes::{train_naive_bayes, NaiveBayesConfig, NaiveBayesModel};
pub use svm::{encoded_dim, train_svm, BinarySvm, SvmConfig, SvmModel};
pub use tree::{train_tree, TreeConfig, TreeModel, TreeNode};

pub const MODEL_FORMAT: &str = "crickpred-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("row {row} has a missing value; impute before training")]
    MissingValues { row: usize },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("class counts are all zero")]
    AllZero,
    #[error("split leaves an empty subset or has zero split information")]
    DegenerateSplit,
    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: String, expected: u32 },
    #[error("cannot read model: {0}")]
    Deserialize(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "nb")]
    NaiveBayes,
    #[serde(rename = "tree")]
    Tree,
    #[serde(rename = "rf")]
    Forest,
    #[serde(rename = "svm")]
    Svm,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] =
        [LearnerKind::NaiveBayes, LearnerKind::Tree, LearnerKind::Forest, LearnerKind::Svm];

    pub fn token(self) -> &'static str {
        match self {
            LearnerKind::NaiveBayes => "nb",
            LearnerKind::Tree => "tree",
            LearnerKind::Forest => "rf",
            LearnerKind::Svm => "svm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            LearnerKind::NaiveBayes => "Naive Bayes",
            LearnerKind::Tree => "Decision Tree",
            LearnerKind::Forest => "Random Forest",
            LearnerKind::Svm => "SVM",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| format!("unknown learner `{s}` (nb|tree|rf|svm)"))
    }
}

/// A learner with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerSpec {
    NaiveBayes(NaiveBayesConfig),
    Tree(TreeConfig),
    Forest(ForestConfig),
    Svm(SvmConfig),
}

impl LearnerSpec {
    /// Default hyperparameters; `seed` drives the forest's randomness.
    pub fn default_for(kind: LearnerKind, seed: u64) -> Self {
        match kind {
            LearnerKind::NaiveBayes => LearnerSpec::NaiveBayes(NaiveBayesConfig::default()),
            LearnerKind::Tree => LearnerSpec::Tree(TreeConfig::default()),
            LearnerKind::Forest => LearnerSpec::Forest(ForestConfig { seed, ..ForestConfig::default() }),
            LearnerKind::Svm => LearnerSpec::Svm(SvmConfig::default()),
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerSpec::NaiveBayes(_) => LearnerKind::NaiveBayes,
            LearnerSpec::Tree(_) => LearnerKind::Tree,
            LearnerSpec::Forest(_) => LearnerKind::Forest,
            LearnerSpec::Svm(_) => LearnerKind::Svm,
        }
    }

    pub fn train(&self, dataset: &Dataset) -> Result<TrainedModel, LearnerError> {
        check_trainable(dataset)?;
        let mut warnings = Vec::new();
        let payload = match self {
            LearnerSpec::NaiveBayes(c) => ModelPayload::NaiveBayes(train_naive_bayes(dataset, c)?),
            LearnerSpec::Tree(c) => ModelPayload::Tree(train_tree(dataset, c)?),
            LearnerSpec::Forest(c) => ModelPayload::Forest(train_forest(dataset, c)?),
            LearnerSpec::Svm(c) => {
                let m = train_svm(dataset, c)?;
                if !m.converged() {
                    warnings.push("SVM solver hit its iteration limit before converging".to_string());
                }
                ModelPayload::Svm(m)
            }
        };
        Ok(TrainedModel { schema: dataset.schema.clone(), target: None, impute: None, payload, warnings })
    }
}

pub(crate) fn check_trainable(dataset: &Dataset) -> Result<(), LearnerError> {
    if dataset.is_empty() {
        return Err(LearnerError::EmptyDataset);
    }
    if let Some(row) = dataset.samples.iter().position(|s| s.has_missing()) {
        return Err(LearnerError::MissingValues { row });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// 1-based class.
    pub class: u8,
    pub probabilities: Vec<f64>,
}

impl Prediction {
    /// Class of the largest probability, lowest class on ties.
    pub fn from_probabilities(probabilities: Vec<f64>) -> Self {
        let class = argmax(&probabilities) as u8 + 1;
        Prediction { class, probabilities }
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelPayload {
    NaiveBayes(NaiveBayesModel),
    Tree(TreeModel),
    Forest(ForestModel),
    Svm(SvmModel),
}

impl ModelPayload {
    pub fn kind(&self) -> LearnerKind {
        match self {
            ModelPayload::NaiveBayes(_) => LearnerKind::NaiveBayes,
            ModelPayload::Tree(_) => LearnerKind::Tree,
            ModelPayload::Forest(_) => LearnerKind::Forest,
            ModelPayload::Svm(_) => LearnerKind::Svm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub schema: Schema,
    /// What the model predicts, when trained from a built dataset.
    pub target: Option<Target>,
    /// Training-fold statistics for filling missing values at inference.
    pub impute: Option<ImputeStats>,
    pub payload: ModelPayload,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    format_version: u32,
    schema_fingerprint: String,
    variant: LearnerKind,
    schema: Schema,
    target: Option<Target>,
    impute: Option<ImputeStats>,
    warnings: Vec<String>,
    payload: ModelPayload,
}

impl TrainedModel {
    pub fn kind(&self) -> LearnerKind {
        self.payload.kind()
    }

    pub fn n_classes(&self) -> usize {
        self.schema.n_classes
    }

    pub fn check_schema(&self, schema: &Schema) -> Result<(), LearnerError> {
        let (want, got) = (self.schema.fingerprint(), schema.fingerprint());
        if want != got {
            return Err(LearnerError::SchemaMismatch(format!("model expects schema {want}, data has {got}")));
        }
        Ok(())
    }

    /// Predicts one encoded row, which must be complete.
    pub fn predict(&self, row: &[f64]) -> Result<Prediction, LearnerError> {
        if row.len() != self.schema.len() {
            return Err(LearnerError::SchemaMismatch(format!(
                "row has {} values, schema has {} features",
                row.len(),
                self.schema.len()
            )));
        }
        if row.iter().any(|v| v.is_nan()) {
            return Err(LearnerError::MissingValues { row: 0 });
        }
        let probabilities = match &self.payload {
            ModelPayload::NaiveBayes(m) => m.predict_proba(row),
            ModelPayload::Tree(m) => m.predict_proba(row),
            ModelPayload::Forest(m) => m.predict_proba(row),
            ModelPayload::Svm(m) => return Ok(m.predict(row)),
        };
        Ok(Prediction::from_probabilities(probabilities))
    }

    pub fn to_json(&self) -> String {
        let c = Container {
            format: MODEL_FORMAT.to_string(),
            format_version: MODEL_FORMAT_VERSION,
            schema_fingerprint: self.schema.fingerprint(),
            variant: self.kind(),
            schema: self.schema.clone(),
            target: self.target,
            impute: self.impute.clone(),
            warnings: self.warnings.clone(),
            payload: self.payload.clone(),
        };
        serde_json::to_string(&c).expect("model payloads hold only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnerError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| LearnerError::Deserialize(e.to_string()))?;
        if value.get("format").and_then(|v| v.as_str()) != Some(MODEL_FORMAT) {
            return Err(LearnerError::Deserialize("not a crickpred model file".to_string()));
        }
        match value.get("format_version") {
            Some(v) if v.as_u64() == Some(u64::from(MODEL_FORMAT_VERSION)) => {}
            other => {
                return Err(LearnerError::Version {
                    found: other.map_or("none".to_string(), |v| v.to_string()),
                    expected: MODEL_FORMAT_VERSION,
                })
            }
        }
        let c: Container = serde_json::from_str(text).map_err(|e| LearnerError::Deserialize(e.to_string()))?;
        if c.schema.fingerprint() != c.schema_fingerprint {
            return Err(LearnerError::Deserialize("schema fingerprint does not match schema".to_string()));
        }
        if c.variant != c.payload.kind() {
            return Err(LearnerError::Deserialize("variant tag does not match payload".to_string()));
        }
        Ok(TrainedModel {
            schema: c.schema,
            target: c.target,
            impute: c.impute,
            payload: c.payload,
            warnings: c.warnings,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LearnerError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json())
            .map_err(|source| LearnerError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LearnerError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| LearnerError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

/// Class index of every row and the class arity, shared by the learners.
pub(crate) fn class_indices(dataset: &Dataset) -> Vec<usize> {
    dataset.samples.iter().map(|s| s.class_index()).collect()
}

pub(crate) fn normalized(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}
