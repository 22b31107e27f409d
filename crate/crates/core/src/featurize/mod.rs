//! Feature engineering: windowed traditional statistics, 1-5 ratings,
//! weighted derived attributes, match context, labels and imputation.

mod build;
mod context;
mod derived;
mod impute;
mod labels;
mod rating;
mod stats;
mod weights;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetError;

pub use build::{
    batting_derived, batting_schema, bowling_derived, bowling_schema, build_dataset, inference_row, Histories,
    InferenceRow, MatchContext, PlayerProfile,
};
pub use context::opposition_strength;
pub use derived::{derived_batting, derived_bowling, DerivedAttributes};
pub use impute::{impute, ImputeStats, StatisticsSource};
pub use labels::{band_label, encode_runs_label, encode_wickets_label, pressure};
pub use rating::{rate, Attribute, DerivedKind, RatedStats, Rating};
pub use stats::{
    aggregate_batting, aggregate_bowling, rate_batting, rate_bowling, TraditionalBattingStats, TraditionalBowlingStats,
    Window,
};
pub use weights::{Facet, Sign, WeightTerm, WeightVector, WeightVectors};

#[derive(Debug, Error)]
pub enum FeaturizeError {
    #[error("no rating table for {attribute:?} under {kind:?}")]
    UnknownAttribute { attribute: Attribute, kind: DerivedKind },
    #[error("weight config: {0}")]
    Weights(String),
    #[error("roster of {team} has no {facet} players")]
    EmptyRoster { team: String, facet: &'static str },
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// What a dataset predicts: a batsman's run class or a bowler's wicket class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Runs,
    Wickets,
}

impl Target {
    pub fn n_classes(self) -> usize {
        match self {
            Target::Runs => 5,
            Target::Wickets => 3,
        }
    }

    pub fn facet(self) -> Facet {
        match self {
            Target::Runs => Facet::Batting,
            Target::Wickets => Facet::Bowling,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Runs => "runs",
            Target::Wickets => "wickets",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "runs" => Ok(Target::Runs),
            "wickets" => Ok(Target::Wickets),
            _ => Err(format!("unknown target `{s}` (runs|wickets)")),
        }
    }
}
