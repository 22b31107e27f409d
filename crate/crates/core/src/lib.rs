//! Cricket player performance prediction.
//!
//! The pipeline runs innings logs through feature engineering (rated
//! traditional statistics combined into weighted derived attributes plus
//! match context), balances classes with SMOTE, trains one of four
//! classifiers and evaluates it under a train/test split protocol.
//!
//! ```text
//! ingest -> featurize -> dataset -> resample -> learners -> evaluate
//!                                                    \-> cli / serve
//! ```

pub mod ahp;
pub mod cli;
pub mod dataset;
pub mod evaluate;
pub mod featurize;
pub mod ingest;
pub mod learners;
pub mod predict;
pub mod resample;
pub mod serve;

mod rng;

pub use dataset::{Dataset, Feature, FeatureKind, Origin, Provenance, Sample, Schema};
pub use featurize::{Target, WeightVectors};
pub use learners::{LearnerKind, LearnerSpec, Prediction, TrainedModel};
